use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageTag {
    English,
    Bangla,
    Mixed,
    Unknown,
}

impl LanguageTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguageTag::English => "english",
            LanguageTag::Bangla => "bangla",
            LanguageTag::Mixed => "mixed",
            LanguageTag::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A letter in the Bengali Unicode block (U+0980..=U+09FF), including
/// dependent vowel signs, which carry the Alphabetic property.
pub(crate) fn is_bengali_letter(c: char) -> bool {
    ('\u{0980}'..='\u{09FF}').contains(&c) && c.is_alphabetic()
}

pub(crate) fn is_latin_letter(c: char) -> bool {
    c.is_ascii_alphabetic()
        || (c.is_alphabetic()
            && (('\u{00C0}'..='\u{024F}').contains(&c) || ('\u{1E00}'..='\u{1EFF}').contains(&c)))
}

/// Script-ratio language guess over Bengali and Latin letters.
///
/// At least 90% of one script wins outright; otherwise both scripts hold
/// more than 10% and the text is mixed. Text without letters from either
/// script is unknown. At exactly 90/10 the single-script rule applies.
pub fn detect_language(text: &str) -> LanguageTag {
    let (mut bengali, mut latin) = (0u64, 0u64);
    for c in text.chars() {
        if is_bengali_letter(c) {
            bengali += 1;
        } else if is_latin_letter(c) {
            latin += 1;
        }
    }
    let letters = bengali + latin;
    if letters == 0 {
        LanguageTag::Unknown
    } else if bengali * 10 >= letters * 9 {
        LanguageTag::Bangla
    } else if latin * 10 >= letters * 9 {
        LanguageTag::English
    } else {
        LanguageTag::Mixed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_script_inputs() {
        assert_eq!(detect_language("টাকা পাচার হচ্ছে"), LanguageTag::Bangla);
        assert_eq!(detect_language("Mobile banking fraud"), LanguageTag::English);
    }

    #[test]
    fn code_mixed_sentence() {
        let text = "bKash এজেন্ট fraud করেছে";
        // Independent count: ASCII letters vs any non-space codepoint in the
        // Bengali block. Latin = 10 (bKash, fraud); Bengali well above 10%.
        let latin = text.chars().filter(|c| c.is_ascii_alphabetic()).count();
        let bengali = text.chars().filter(|c| ('\u{0980}'..='\u{09FF}').contains(c)).count();
        assert_eq!(latin, 10);
        assert!(bengali * 10 >= (latin + bengali));
        assert!(latin * 10 >= (latin + bengali));
        assert_eq!(detect_language(text), LanguageTag::Mixed);
    }

    #[test]
    fn no_letters_is_unknown() {
        assert_eq!(detect_language("123 !!! ৳৫০০"), LanguageTag::Unknown);
        assert_eq!(detect_language(""), LanguageTag::Unknown);
    }

    #[test]
    fn ninety_percent_boundary_goes_to_single_script() {
        // 9 Latin letters, 1 Bengali letter.
        assert_eq!(detect_language("abcdefghi ক"), LanguageTag::English);
        assert_eq!(detect_language("abcdefgh ক"), LanguageTag::Mixed);
    }

    proptest! {
        #[test]
        fn detection_is_deterministic_and_consistent(s in "[a-z \u{0995}-\u{09A8}0-9]{0,40}") {
            let tag = detect_language(&s);
            prop_assert_eq!(tag, detect_language(&s));
            let b = s.chars().filter(|&c| is_bengali_letter(c)).count();
            let l = s.chars().filter(|&c| is_latin_letter(c)).count();
            let expected = if b + l == 0 { LanguageTag::Unknown }
                else if b * 10 >= (b + l) * 9 { LanguageTag::Bangla }
                else if l * 10 >= (b + l) * 9 { LanguageTag::English }
                else { LanguageTag::Mixed };
            prop_assert_eq!(tag, expected);
        }
    }
}
