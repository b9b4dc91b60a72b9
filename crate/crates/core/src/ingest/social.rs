use chrono::{DateTime, Utc};
use serde_json::Value;

use super::{hashed_id, new_document, IngestBatch, IngestError, SourceConfig, SourceKind};
use crate::corpus::DocumentSource;

/// Reads a social-media export: one JSON object per line, or a JSON array of
/// objects. Field names come from the config.
pub fn parse_social_export(config: &SourceConfig) -> Result<IngestBatch, IngestError> {
    if config.kind != SourceKind::SocialExport {
        return Err(IngestError::Config("parse_social_export needs a social_export source".into()));
    }
    config.validate()?;
    let path = config
        .local_path()
        .ok_or_else(|| IngestError::Config(format!("`{}` is not a file path", config.location)))?;
    let text = std::fs::read_to_string(&path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    parse_social_str(&text, config, Utc::now())
}

pub fn parse_social_str(text: &str, config: &SourceConfig, fetched_at: DateTime<Utc>) -> Result<IngestBatch, IngestError> {
    let trimmed = text.trim_start_matches('\u{feff}').trim();
    if trimmed.is_empty() {
        return Err(IngestError::EmptyExport(config.location.clone()));
    }
    let records: Vec<(usize, Value)> = if trimmed.starts_with('[') {
        let values: Vec<Value> =
            serde_json::from_str(trimmed).map_err(|e| IngestError::Json { line: e.line(), message: e.to_string() })?;
        values.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect()
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, line)| !line.trim().is_empty())
            .map(|(i, line)| {
                serde_json::from_str(line.trim_start_matches('\u{feff}'))
                    .map(|v| (i + 1, v))
                    .map_err(|e| IngestError::Json { line: i + 1, message: e.to_string() })
            })
            .collect::<Result<_, _>>()?
    };

    let mut batch = IngestBatch::default();
    for (ordinal, record) in records {
        let Some(object) = record.as_object() else {
            batch.skipped += 1;
            batch.warnings.push(format!("record {ordinal} is not an object"));
            continue;
        };
        let post = match object.get(&config.text_field) {
            Some(Value::String(s)) => s.trim(),
            _ => {
                batch.skipped += 1;
                batch.warnings.push(format!("record {ordinal} has no `{}` text field", config.text_field));
                continue;
            }
        };
        if post.is_empty() {
            batch.skipped += 1;
            continue;
        }
        let post_id = match object.get(&config.id_field) {
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            _ => None,
        };
        let (id, origin_ref) = match &post_id {
            Some(pid) => (hashed_id("social", &[pid]), format!("{}#{pid}", config.location)),
            None => (
                hashed_id("social", &[&config.location, &ordinal.to_string(), post]),
                format!("{}#{ordinal}", config.location),
            ),
        };
        let mut document = new_document(id, DocumentSource::SocialExport, origin_ref, post.to_string(), fetched_at);
        if let Some(stamp) = object.get(&config.timestamp_field) {
            document.published_at = parse_timestamp(stamp);
            if document.published_at.is_none() && !stamp.is_null() {
                batch.warnings.push(format!("record {ordinal}: unparseable timestamp {stamp}"));
            }
        }
        batch.push(config, document);
    }
    Ok(batch)
}

fn parse_timestamp(value: &Value) -> Option<DateTime<Utc>> {
    match value {
        Value::String(s) => DateTime::parse_from_rfc3339(s.trim()).ok().map(|t| t.with_timezone(&Utc)),
        Value::Number(n) => n.as_i64().and_then(|secs| DateTime::from_timestamp(secs, 0)),
        _ => None,
    }
}
