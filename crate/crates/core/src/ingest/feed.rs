use std::time::Duration;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{hashed_id, new_document, IngestBatch, IngestError, SourceConfig, SourceKind};
use crate::corpus::DocumentSource;
use crate::retry::RetryPolicy;

const HTTP_TIMEOUT: Duration = Duration::from_secs(30);

/// Fetches and parses an RSS or Atom feed with the default retry policy.
pub fn fetch_news_feed(config: &SourceConfig) -> Result<IngestBatch, IngestError> {
    fetch_news_feed_with(config, &RetryPolicy::default())
}

pub fn fetch_news_feed_with(config: &SourceConfig, policy: &RetryPolicy) -> Result<IngestBatch, IngestError> {
    if config.kind != SourceKind::NewsFeed {
        return Err(IngestError::Config("fetch_news_feed needs a news_feed source".into()));
    }
    config.validate()?;
    let body = match config.local_path() {
        Some(path) => std::fs::read_to_string(&path)
            .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?,
        None => http_get(&config.location, policy)?,
    };
    parse_feed(&body, config, Utc::now())
}

struct FetchFailure {
    retryable: bool,
    message: String,
}

fn http_get(url: &str, policy: &RetryPolicy) -> Result<String, IngestError> {
    let agent_config = ureq::Agent::config_builder()
        .timeout_global(Some(HTTP_TIMEOUT))
        .http_status_as_error(false)
        .build();
    let agent = ureq::Agent::new_with_config(agent_config);
    let attempt = |_| -> Result<String, FetchFailure> {
        let transport = |e: ureq::Error| FetchFailure { retryable: true, message: e.to_string() };
        let mut response = agent.get(url).call().map_err(transport)?;
        let status = response.status().as_u16();
        if status >= 400 {
            return Err(FetchFailure { retryable: status >= 500, message: format!("HTTP {status}") });
        }
        response.body_mut().read_to_string().map_err(transport)
    };
    policy.run(attempt, |f| f.retryable).map_err(|failure| IngestError::Fetch {
        url: url.to_string(),
        attempts: failure.attempts,
        message: failure.error.message,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Link,
    Guid,
    Summary,
    Content,
    Published,
    Updated,
}

impl Field {
    fn from_name(name: &str) -> Option<Field> {
        Some(match name {
            "title" => Field::Title,
            "link" => Field::Link,
            "guid" | "id" => Field::Guid,
            "description" | "summary" => Field::Summary,
            "content:encoded" | "content" => Field::Content,
            "pubDate" | "published" | "dc:date" => Field::Published,
            "updated" => Field::Updated,
            _ => return None,
        })
    }
}

#[derive(Default)]
struct ItemBuilder {
    title: String,
    link: String,
    guid: String,
    summary: String,
    content: String,
    published: String,
    updated: String,
}

impl ItemBuilder {
    fn slot(&mut self, field: Field) -> &mut String {
        match field {
            Field::Title => &mut self.title,
            Field::Link => &mut self.link,
            Field::Guid => &mut self.guid,
            Field::Summary => &mut self.summary,
            Field::Content => &mut self.content,
            Field::Published => &mut self.published,
            Field::Updated => &mut self.updated,
        }
    }
}

fn parse_error<T>(reader: &Reader<&[u8]>, message: impl ToString) -> Result<T, IngestError> {
    Err(IngestError::Parse { offset: reader.error_position(), message: message.to_string() })
}

fn qname(e: &BytesStart<'_>) -> String {
    e.name().as_ref().to_string()
}

fn local(name: &str) -> &str {
    name.rsplit(':').next().unwrap_or(name)
}

fn predefined_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        _ => return None,
    })
}

fn is_block(name: &str) -> bool {
    matches!(local(name), "p" | "div" | "br" | "li" | "h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "blockquote")
}

/// Atom `<link href=..>` with no `rel` or `rel="alternate"`.
fn atom_alternate_href(e: &BytesStart<'_>) -> Option<String> {
    let mut href = None;
    let mut rel = None;
    for attr in e.attributes().flatten() {
        let value = attr.normalized_value(quick_xml::XmlVersion::Explicit1_0).ok()?.into_owned();
        match attr.key.as_ref() {
            "href" => href = Some(value),
            "rel" => rel = Some(value),
            _ => {}
        }
    }
    match rel.as_deref() {
        None | Some("alternate") => href,
        _ => None,
    }
}

/// Parses RSS 2.0 or Atom XML into documents, one per `<item>` or `<entry>`.
pub fn parse_feed(xml: &str, config: &SourceConfig, fetched_at: DateTime<Utc>) -> Result<IngestBatch, IngestError> {
    let mut reader = Reader::from_reader(xml.as_bytes());
    let mut batch = IngestBatch::default();
    let mut stack: Vec<String> = Vec::new();
    let mut saw_root = false;
    let mut item: Option<(ItemBuilder, usize)> = None;
    let mut field: Option<(Field, usize)> = None;
    let mut ordinal = 0usize;

    loop {
        let event = match reader.read_event() {
            Ok(event) => event,
            Err(e) => return parse_error(&reader, e),
        };
        match event {
            Event::Start(e) => {
                let name = qname(&e);
                let depth = stack.len();
                if depth == 0 {
                    if !matches!(local(&name), "rss" | "feed" | "RDF") {
                        return parse_error(&reader, format!("root element <{name}> is not rss or feed"));
                    }
                    saw_root = true;
                }
                match (&mut item, field) {
                    (None, _) if matches!(local(&name), "item" | "entry") => item = Some((ItemBuilder::default(), depth)),
                    (Some((builder, item_depth)), None) if depth == *item_depth + 1 => {
                        if let Some(f) = Field::from_name(&name) {
                            field = Some((f, depth));
                            builder.slot(f).clear();
                            if f == Field::Link {
                                if let Some(href) = atom_alternate_href(&e) {
                                    builder.link = href;
                                }
                            }
                        }
                    }
                    (Some((builder, _)), Some((f, _))) if is_block(&name) => builder.slot(f).push('\n'),
                    _ => {}
                }
                stack.push(name);
            }
            Event::Empty(e) => {
                let name = qname(&e);
                if stack.is_empty() {
                    return parse_error(&reader, format!("root element <{name}> is not rss or feed"));
                }
                match (&mut item, field) {
                    (Some((builder, item_depth)), None) if stack.len() == *item_depth + 1 && name == "link" => {
                        if builder.link.is_empty() {
                            if let Some(href) = atom_alternate_href(&e) {
                                builder.link = href;
                            }
                        }
                    }
                    (Some((builder, _)), Some((f, _))) if is_block(&name) => builder.slot(f).push('\n'),
                    _ => {}
                }
            }
            Event::End(_) => {
                stack.pop();
                let depth = stack.len();
                if field.is_some_and(|(_, d)| d == depth) {
                    field = None;
                }
                if item.as_ref().is_some_and(|(_, d)| *d == depth) {
                    let (builder, _) = item.take().expect("checked above");
                    ordinal += 1;
                    finish_item(builder, ordinal, config, fetched_at, &mut batch);
                }
            }
            Event::Text(t) => {
                if let (Some((builder, _)), Some((f, _))) = (&mut item, field) {
                    builder.slot(f).push_str(&t.xml10_content());
                }
            }
            Event::CData(t) => {
                if let (Some((builder, _)), Some((f, _))) = (&mut item, field) {
                    builder.slot(f).push_str(&t.xml10_content());
                }
            }
            Event::GeneralRef(r) => {
                if let (Some((builder, _)), Some((f, _))) = (&mut item, field) {
                    let resolved = match r.resolve_char_ref() {
                        Ok(Some(c)) => Some(c),
                        Ok(None) => predefined_entity(&r.xml10_content()),
                        Err(e) => return parse_error(&reader, e),
                    };
                    match resolved {
                        Some(c) => builder.slot(f).push(c),
                        // Left for the text cleaner, which knows HTML entity names.
                        None => {
                            let slot = builder.slot(f);
                            slot.push('&');
                            slot.push_str(&r.xml10_content());
                            slot.push(';');
                        }
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if let Some(open) = stack.last() {
        return Err(IngestError::Parse {
            offset: reader.buffer_position(),
            message: format!("unexpected end of input inside <{open}>"),
        });
    }
    if !saw_root {
        return Err(IngestError::Parse { offset: 0, message: "no rss or feed root element".into() });
    }
    Ok(batch)
}

fn parse_time(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    DateTime::parse_from_rfc2822(text)
        .or_else(|_| DateTime::parse_from_rfc3339(text))
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

fn finish_item(
    builder: ItemBuilder,
    ordinal: usize,
    config: &SourceConfig,
    fetched_at: DateTime<Utc>,
    batch: &mut IngestBatch,
) {
    let content = builder.content.trim();
    let raw_text = if content.is_empty() { builder.summary.trim() } else { content };
    if raw_text.is_empty() {
        batch.skipped += 1;
        batch.warnings.push(format!("feed item {ordinal} has no content"));
        return;
    }
    let guid = builder.guid.trim();
    let origin_ref = match builder.link.trim() {
        "" if guid.starts_with("http://") || guid.starts_with("https://") => guid.to_string(),
        "" => format!("{}#item-{ordinal}", config.location),
        link => link.to_string(),
    };
    let mut document = new_document(
        hashed_id("news", &[&origin_ref]),
        DocumentSource::NewsFeed,
        origin_ref,
        raw_text.to_string(),
        fetched_at,
    );
    let title = builder.title.trim();
    document.title = (!title.is_empty()).then(|| title.to_string());
    let stamp = if builder.published.trim().is_empty() { &builder.updated } else { &builder.published };
    if !stamp.trim().is_empty() {
        document.published_at = parse_time(stamp);
        if document.published_at.is_none() {
            batch.warnings.push(format!("feed item {ordinal}: unparseable date `{}`", stamp.trim()));
        }
    }
    batch.push(config, document);
}
