//! Word alignments: Praat TextGrid subset and an equivalent JSON form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::manifest::DEFAULT_SILENCE_TOKENS;

/// Slack allowed when checking interval ordering; aligners print rounded times.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentFormat {
    TextGrid,
    Json,
}

impl AlignmentFormat {
    /// Infers the format from a file extension (`.TextGrid` or `.json`).
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        match ext.as_str() {
            "textgrid" => Ok(Self::TextGrid),
            "json" => Ok(Self::Json),
            _ => Err(Error::Alignment(format!(
                "unknown alignment format for {}",
                path.display()
            ))),
        }
    }
}

impl FromStr for AlignmentFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "textgrid" => Ok(Self::TextGrid),
            "json" => Ok(Self::Json),
            other => Err(Error::Alignment(format!("unknown alignment format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordInterval {
    pub token: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl WordInterval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// One speaker's rendition of one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedUtterance {
    pub speaker_id: String,
    pub sentence_id: String,
    pub words: Vec<WordInterval>,
    pub silences: Vec<Interval>,
    /// Audio file backing this utterance; unresolved for a bare parse.
    pub audio_path: Option<PathBuf>,
}

/// Set of labels that mark an interval as silence. Matching ignores case and
/// surrounding whitespace.
#[derive(Debug, Clone)]
pub struct SilenceTokens(Vec<String>);

impl SilenceTokens {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            tokens
                .into_iter()
                .map(|t| t.as_ref().trim().to_lowercase())
                .collect(),
        )
    }

    pub fn contains(&self, label: &str) -> bool {
        let label = label.trim().to_lowercase();
        self.0.iter().any(|t| *t == label)
    }
}

impl Default for SilenceTokens {
    fn default() -> Self {
        Self::new(DEFAULT_SILENCE_TOKENS)
    }
}

impl AlignedUtterance {
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|w| w.token.as_str())
    }

    /// End of the last labeled interval.
    pub fn end_s(&self) -> f64 {
        let w = self.words.last().map_or(0.0, |w| w.end_s);
        let s = self.silences.last().map_or(0.0, |s| s.end_s);
        w.max(s)
    }

    /// Drops silences shorter than `min_ms`.
    pub fn drop_short_silences(&mut self, min_ms: f64) {
        if min_ms > 0.0 {
            self.silences.retain(|s| s.duration_s() * 1000.0 >= min_ms);
        }
    }

    /// Checks that the labeled material fits in `audio_duration_s` (10 ms slack).
    pub fn check_fits(&self, audio_duration_s: f64) -> Result<()> {
        let total: f64 = self.words.iter().map(|w| w.duration_s()).sum::<f64>()
            + self.silences.iter().map(|s| s.duration_s()).sum::<f64>();
        if total > audio_duration_s + 0.010 || self.end_s() > audio_duration_s + 0.010 {
            return Err(Error::Alignment(format!(
                "alignment for ({}, {}) extends to {:.3} s but audio lasts {:.3} s",
                self.speaker_id,
                self.sentence_id,
                self.end_s(),
                audio_duration_s
            )));
        }
        Ok(())
    }

    fn from_labeled(labeled: Vec<(f64, f64, String)>, silence: &SilenceTokens) -> Result<Self> {
        let mut words = Vec::new();
        let mut silences = Vec::new();
        let mut prev_end = f64::NEG_INFINITY;
        for (start, end, label) in labeled {
            if !start.is_finite() || !end.is_finite() {
                return Err(Error::Alignment("non-finite interval time".into()));
            }
            if start < prev_end - TIME_EPS {
                return Err(Error::Alignment(format!(
                    "overlapping intervals: `{label}` starts at {start} before previous end {prev_end}"
                )));
            }
            if end < start {
                return Err(Error::Alignment(format!(
                    "interval `{label}` ends before it starts ({start}, {end})"
                )));
            }
            prev_end = end;
            if silence.contains(&label) {
                if end > start {
                    silences.push(Interval {
                        start_s: start,
                        end_s: end,
                    });
                }
            } else {
                if end <= start {
                    return Err(Error::Alignment(format!(
                        "zero-length word interval `{label}` at {start}"
                    )));
                }
                words.push(WordInterval {
                    token: label.trim().to_string(),
                    start_s: start,
                    end_s: end,
                });
            }
        }
        if words.is_empty() {
            return Err(Error::Alignment("empty word tier".into()));
        }
        Ok(Self {
            speaker_id: String::new(),
            sentence_id: String::new(),
            words,
            silences,
            audio_path: None,
        })
    }

    fn labeled_intervals(&self) -> Vec<(f64, f64, &str)> {
        let mut all: Vec<(f64, f64, &str)> = self
            .words
            .iter()
            .map(|w| (w.start_s, w.end_s, w.token.as_str()))
            .chain(self.silences.iter().map(|s| (s.start_s, s.end_s, "[SIL]")))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        all
    }

    /// Long-format TextGrid with a single `words` tier.
    pub fn to_textgrid(&self) -> String {
        let intervals = self.labeled_intervals();
        let xmax = self.end_s();
        let mut out = String::new();
        out.push_str("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n");
        let _ = writeln!(out, "xmin = 0\nxmax = {xmax}\ntiers? <exists>\nsize = 1\nitem []:");
        let _ = writeln!(out, "    item [1]:\n        class = \"IntervalTier\"\n        name = \"words\"");
        let _ = writeln!(out, "        xmin = 0\n        xmax = {xmax}");
        let _ = writeln!(out, "        intervals: size = {}", intervals.len());
        for (i, (s, e, label)) in intervals.iter().enumerate() {
            let _ = writeln!(out, "        intervals [{}]:", i + 1);
            let _ = writeln!(out, "            xmin = {s}\n            xmax = {e}");
            let _ = writeln!(out, "            text = \"{}\"", label.replace('"', "\"\""));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = JsonAlignment {
            words: self
                .labeled_intervals()
                .into_iter()
                .map(|(s, e, t)| JsonInterval {
                    t: t.to_string(),
                    s,
                    e,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("alignment serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonAlignment {
    words: Vec<JsonInterval>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonInterval {
    t: String,
    s: f64,
    e: f64,
}

/// Parses a word alignment. The returned utterance has empty ids and no audio.
pub fn parse_alignment(
    bytes: &[u8],
    format: AlignmentFormat,
    silence: &SilenceTokens,
) -> Result<AlignedUtterance> {
    let labeled = match format {
        AlignmentFormat::Json => {
            let doc: JsonAlignment = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
                what: "alignment json",
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            doc.words.into_iter().map(|w| (w.s, w.e, w.t)).collect()
        }
        AlignmentFormat::TextGrid => parse_textgrid_words(&decode_text(bytes)?)?,
    };
    AlignedUtterance::from_labeled(labeled, silence)
}

fn decode_text(bytes: &[u8]) -> Result<String> {
    let utf16 = |big_endian: bool| -> Result<String> {
        let units: Vec<u16> = bytes[2..]
            .chunks_exact(2)
            .map(|c| {
                if big_endian {
                    u16::from_be_bytes([c[0], c[1]])
                } else {
                    u16::from_le_bytes([c[0], c[1]])
                }
            })
            .collect();
        String::from_utf16(&units).map_err(|_| Error::Alignment("invalid UTF-16 text".into()))
    };
    match bytes {
        [0xFF, 0xFE, ..] => utf16(false),
        [0xFE, 0xFF, ..] => utf16(true),
        [0xEF, 0xBB, 0xBF, rest @ ..] => std::str::from_utf8(rest)
            .map(str::to_owned)
            .map_err(|_| Error::Alignment("invalid UTF-8 text".into())),
        _ => std::str::from_utf8(bytes)
            .map(str::to_owned)
            .map_err(|_| Error::Alignment("invalid UTF-8 text".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Str(String),
    Flag(String),
}

#[derive(Debug)]
struct Token {
    value: Value,
    line: usize,
    column: usize,
}

/// Reduces either TextGrid layout to its value stream. Long-format keys
/// (`xmin =`, `item [1]:`) carry no values and are skipped, which makes the
/// long and short layouts produce identical streams.
fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 0usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 0;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column + 1);
        match c {
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            bump!();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => {
                            return Err(Error::Parse {
                                what: "textgrid",
                                line: tl,
                                column: tc,
                                message: "unterminated string".into(),
                            })
                        }
                    }
                }
                tokens.push(Token { value: Value::Str(s), line: tl, column: tc });
            }
            '!' => {
                while let Some(ch) = bump!() {
                    if ch == '\n' {
                        break;
                    }
                }
            }
            '[' => {
                while let Some(ch) = bump!() {
                    if ch == ']' {
                        break;
                    }
                }
            }
            '<' => {
                let mut s = String::new();
                bump!();
                loop {
                    match bump!() {
                        Some('>') => break,
                        Some(ch) if !ch.is_whitespace() => s.push(ch),
                        _ => {
                            return Err(Error::Parse {
                                what: "textgrid",
                                line: tl,
                                column: tc,
                                message: "unterminated flag".into(),
                            })
                        }
                    }
                }
                tokens.push(Token { value: Value::Flag(s), line: tl, column: tc });
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || matches!(ch, '.' | '-' | '+') {
                        s.push(ch);
                        bump!();
                    } else {
                        break;
                    }
                }
                let v: f64 = s.parse().map_err(|_| Error::Parse {
                    what: "textgrid",
                    line: tl,
                    column: tc,
                    message: format!("invalid number `{s}`"),
                })?;
                tokens.push(Token { value: Value::Num(v), line: tl, column: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                while let Some(&ch) = chars.peek() {
                    if ch.is_alphanumeric() || matches!(ch, '_' | '?') {
                        bump!();
                    } else {
                        break;
                    }
                }
            }
            _ => {
                bump!();
            }
        }
    }
    Ok(tokens)
}

struct Stream {
    tokens: Vec<Token>,
    pos: usize,
}

impl Stream {
    fn err(&self, message: impl Into<String>) -> Error {
        let (line, column) = self
            .tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map_or((1, 1), |t| (t.line, t.column));
        Error::Parse {
            what: "textgrid",
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<&Value> {
        if self.pos >= self.tokens.len() {
            return Err(self.err("unexpected end of file"));
        }
        self.pos += 1;
        Ok(&self.tokens[self.pos - 1].value)
    }

    fn num(&mut self) -> Result<f64> {
        match self.next()? {
            Value::Num(v) => Ok(*v),
            other => {
                let msg = format!("expected number, found {other:?}");
                self.pos -= 1;
                Err(self.err(msg))
            }
        }
    }

    fn count(&mut self) -> Result<usize> {
        let v = self.num()?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e7 {
            self.pos -= 1;
            return Err(self.err(format!("invalid count {v}")));
        }
        Ok(v as usize)
    }

    fn string(&mut self) -> Result<String> {
        match self.next()? {
            Value::Str(s) => Ok(s.clone()),
            other => {
                let msg = format!("expected string, found {other:?}");
                self.pos -= 1;
                Err(self.err(msg))
            }
        }
    }
}

fn parse_textgrid_words(text: &str) -> Result<Vec<(f64, f64, String)>> {
    let mut s = Stream {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let file_type = s.string()?;
    let class = s.string()?;
    if file_type != "ooTextFile" || class != "TextGrid" {
        return Err(Error::Alignment(format!(
            "not a text TextGrid (file type `{file_type}`, class `{class}`)"
        )));
    }
    s.num()?;
    s.num()?;
    match s.next()? {
        Value::Flag(f) if f == "exists" => {}
        _ => return Err(Error::Alignment("TextGrid has no tiers".into())),
    }
    let n_tiers = s.count()?;

    let mut interval_tiers: Vec<(String, Vec<(f64, f64, String)>)> = Vec::new();
    for _ in 0..n_tiers {
        let class = s.string()?;
        let name = s.string()?;
        s.num()?;
        s.num()?;
        let n = s.count()?;
        match class.as_str() {
            "IntervalTier" => {
                let mut intervals = Vec::with_capacity(n.min(4096));
                for _ in 0..n {
                    let start = s.num()?;
                    let end = s.num()?;
                    let label = s.string()?;
                    intervals.push((start, end, label));
                }
                interval_tiers.push((name, intervals));
            }
            "TextTier" => {
                for _ in 0..n {
                    s.num()?;
                    s.string()?;
                }
            }
            other => return Err(Error::Alignment(format!("unknown tier class `{other}`"))),
        }
    }

    if let Some(pos) = interval_tiers
        .iter()
        .position(|(name, _)| name.eq_ignore_ascii_case("words"))
    {
        return Ok(interval_tiers.swap_remove(pos).1);
    }
    match interval_tiers.len() {
        1 => Ok(interval_tiers.pop().unwrap().1),
        0 => Err(Error::Alignment("empty word tier".into())),
        _ => Err(Error::Alignment(
            "several interval tiers and none named `words`".into(),
        )),
    }
}

/// Case-insensitive token key with punctuation removed, used to compare word
/// sequences across speakers.
pub fn token_key(token: &str) -> String {
    token
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LONG: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 1.2
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 1.2
        intervals: size = 1
        intervals [1]:
            xmin = 0
            xmax = 1.2
            text = "AH"
    item [2]:
        class = "IntervalTier"
        name = "words"
        xmin = 0
        xmax = 1.2
        intervals: size = 3
        intervals [1]:
            xmin = 0
            xmax = 0.5
            text = "anna"
        intervals [2]:
            xmin = 0.5
            xmax = 0.7
            text = "[SIL]"
        intervals [3]:
            xmin = 0.7
            xmax = 1.2
            text = "dressed"
"#;

    const SHORT: &str = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n1.2\n<exists>\n1\n\"IntervalTier\"\n\"words\"\n0\n1.2\n3\n0\n0.5\n\"anna\"\n0.5\n0.7\n\"[SIL]\"\n0.7\n1.2\n\"dressed\"\n";

    fn tg(bytes: &str) -> Result<AlignedUtterance> {
        parse_alignment(bytes.as_bytes(), AlignmentFormat::TextGrid, &SilenceTokens::default())
    }

    #[test]
    fn silence_is_routed_out_of_words() {
        let utt = tg(LONG).unwrap();
        let tokens: Vec<_> = utt.tokens().collect();
        assert_eq!(tokens, ["anna", "dressed"]);
        assert_eq!(
            utt.silences,
            vec![Interval {
                start_s: 0.5,
                end_s: 0.7
            }]
        );
        assert_eq!(utt.words[1].start_s, 0.7);
    }

    #[test]
    fn short_and_long_layouts_agree() {
        assert_eq!(tg(SHORT).unwrap(), tg(LONG).unwrap());
    }

    #[test]
    fn json_form_matches_textgrid() {
        let json = r#"{"words":[{"t":"anna","s":0.0,"e":0.5},{"t":"[SIL]","s":0.5,"e":0.7},{"t":"dressed","s":0.7,"e":1.2}]}"#;
        let from_json =
            parse_alignment(json.as_bytes(), AlignmentFormat::Json, &SilenceTokens::default())
                .unwrap();
        assert_eq!(from_json, tg(LONG).unwrap());
    }

    #[test]
    fn zero_length_word_is_rejected() {
        let json = r#"{"words":[{"t":"a","s":0.0,"e":0.5},{"t":"the","s":0.5,"e":0.5}]}"#;
        let err = parse_alignment(json.as_bytes(), AlignmentFormat::Json, &SilenceTokens::default())
            .unwrap_err();
        assert!(err.to_string().contains("zero-length"), "{err}");
    }

    #[test]
    fn overlap_is_rejected() {
        let json = r#"{"words":[{"t":"a","s":0.0,"e":0.5},{"t":"b","s":0.4,"e":0.9}]}"#;
        let err = parse_alignment(json.as_bytes(), AlignmentFormat::Json, &SilenceTokens::default())
            .unwrap_err();
        assert!(err.to_string().contains("overlapping"), "{err}");
    }

    #[test]
    fn only_silence_means_empty_tier() {
        let json = r#"{"words":[{"t":"sil","s":0.0,"e":0.5},{"t":"","s":0.5,"e":0.9}]}"#;
        let err = parse_alignment(json.as_bytes(), AlignmentFormat::Json, &SilenceTokens::default())
            .unwrap_err();
        assert!(err.to_string().contains("empty word tier"));
    }

    #[test]
    fn unknown_format() {
        assert!("praat".parse::<AlignmentFormat>().is_err());
        assert!(AlignmentFormat::from_path(Path::new("a.lab")).is_err());
        assert_eq!(
            AlignmentFormat::from_path(Path::new("x/A.TextGrid")).unwrap(),
            AlignmentFormat::TextGrid
        );
    }

    #[test]
    fn custom_silence_tokens() {
        let json = r#"{"words":[{"t":"a","s":0.0,"e":0.5},{"t":"<pau>","s":0.5,"e":0.9}]}"#;
        let utt = parse_alignment(
            json.as_bytes(),
            AlignmentFormat::Json,
            &SilenceTokens::new(["<pau>"]),
        )
        .unwrap();
        assert_eq!(utt.words.len(), 1);
        assert_eq!(utt.silences.len(), 1);
    }

    #[test]
    fn utf16_textgrid() {
        let mut bytes = vec![0xFF, 0xFE];
        for u in SHORT.encode_utf16() {
            bytes.extend_from_slice(&u.to_le_bytes());
        }
        let utt = parse_alignment(&bytes, AlignmentFormat::TextGrid, &SilenceTokens::default())
            .unwrap();
        assert_eq!(utt, tg(SHORT).unwrap());
    }

    #[test]
    fn truncated_textgrid_reports_position() {
        let cut = &LONG[..LONG.len() - 40];
        assert!(matches!(tg(cut).unwrap_err(), Error::Parse { .. }));
    }

    #[test]
    fn token_keys_ignore_case_and_punctuation() {
        assert_eq!(token_key("Emma,"), "emma");
        assert_eq!(token_key("\"Don't"), "dont");
        assert_eq!(token_key("don't"), token_key("DONT"));
    }

    #[test]
    fn min_silence_filter() {
        let mut utt = tg(LONG).unwrap();
        utt.drop_short_silences(250.0);
        assert!(utt.silences.is_empty());
    }

    mod roundtrip {
        use super::*;
        use proptest::prelude::*;

        fn utterance() -> impl Strategy<Value = AlignedUtterance> {
            prop::collection::vec((1u32..500, 0u32..300, "[a-z]{1,8}"), 1..12).prop_map(|items| {
                let mut t = 0.0;
                let mut words = Vec::new();
                let mut silences = Vec::new();
                for (dur_ms, gap_ms, token) in items {
                    let start = t;
                    t += dur_ms as f64 / 1000.0;
                    words.push(WordInterval {
                        token,
                        start_s: start,
                        end_s: t,
                    });
                    if gap_ms > 0 {
                        let s = t;
                        t += gap_ms as f64 / 997.0;
                        silences.push(Interval { start_s: s, end_s: t });
                    }
                }
                AlignedUtterance {
                    speaker_id: String::new(),
                    sentence_id: String::new(),
                    words,
                    silences,
                    audio_path: None,
                }
            })
        }

        proptest! {
            #[test]
            fn serialize_then_parse_is_identity(utt in utterance()) {
                let sil = SilenceTokens::default();
                let tg = parse_alignment(utt.to_textgrid().as_bytes(), AlignmentFormat::TextGrid, &sil).unwrap();
                prop_assert_eq!(&tg, &utt);
                let js = parse_alignment(utt.to_json().as_bytes(), AlignmentFormat::Json, &sil).unwrap();
                prop_assert_eq!(&js, &utt);
            }
        }
    }
}
