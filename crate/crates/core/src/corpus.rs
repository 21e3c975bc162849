//! Multiple-choice records, dataset statistics and the parser for
//! separator-delimited generated sequences.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Default separator between question and options in generated sequences.
pub const DEFAULT_SEPARATOR: &str = "[SEP]";

/// Letters used for answer options in dataset files.
pub const ANSWER_LETTERS: [&str; 4] = ["A", "B", "C", "D"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Trn,
    Dev,
    Evl,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Trn, Split::Dev, Split::Evl];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Trn => "trn",
            Split::Dev => "dev",
            Split::Evl => "evl",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trn" | "train" => Ok(Split::Trn),
            "dev" => Ok(Split::Dev),
            "evl" | "test" => Ok(Split::Evl),
            other => Err(Error::InvalidRecord(format!("unknown split `{other}`"))),
        }
    }
}

/// Difficulty class. RACE-M, RACE-H and RACE-C map to easy, medium and hard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::InvalidRecord(format!("unknown difficulty `{other}`"))),
        }
    }
}

/// Maps an answer letter `A`..`D` to its 0-based option index.
pub fn answer_index(letter: &str) -> Result<usize> {
    ANSWER_LETTERS.iter().position(|l| *l == letter).ok_or_else(|| Error::UnknownAnswerLetter(letter.to_string()))
}

/// One context/question/options/answer record.
#[derive(Debug, Clone, PartialEq)]
pub struct McqExample {
    pub example_id: String,
    pub context_id: String,
    pub context: String,
    pub question: String,
    pub options: Vec<String>,
    pub correct_index: usize,
    pub split: Split,
    pub difficulty: Option<Difficulty>,
}

impl McqExample {
    /// Checks the record invariants: at least two options, the answer index
    /// in range, non-blank question and context.
    pub fn validate(&self) -> Result<()> {
        if self.options.len() < 2 {
            return Err(Error::InvalidRecord(format!(
                "`{}` has {} option(s), need at least 2",
                self.example_id,
                self.options.len()
            )));
        }
        if self.correct_index >= self.options.len() {
            return Err(Error::InvalidRecord(format!(
                "`{}` answer index {} out of range for {} options",
                self.example_id,
                self.correct_index,
                self.options.len()
            )));
        }
        if self.question.trim().is_empty() {
            return Err(Error::InvalidRecord(format!("`{}` has an empty question", self.example_id)));
        }
        if self.context.trim().is_empty() {
            return Err(Error::InvalidRecord(format!("`{}` has an empty context", self.example_id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseStatus {
    Ok,
    TooFewSegments,
    EmptySegment,
}

impl ParseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseStatus::Ok => "ok",
            ParseStatus::TooFewSegments => "too_few_segments",
            ParseStatus::EmptySegment => "empty_segment",
        }
    }
}

/// A raw generated sequence and its parsed question and options. The first
/// option is the one the generator asserts to be correct.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedOutput {
    pub context_id: String,
    pub raw: String,
    pub question: String,
    pub options: Vec<String>,
    pub parse_status: ParseStatus,
}

impl GeneratedOutput {
    pub fn is_parsed(&self) -> bool {
        self.parse_status == ParseStatus::Ok
    }
}

/// Splits `raw` on `separator`: the first segment is the question, the rest
/// are options. Every segment is trimmed and kept, including empty ones.
pub fn parse_generated(context_id: &str, raw: &str, separator: &str) -> Result<GeneratedOutput> {
    if separator.is_empty() {
        return Err(Error::DomainError("separator must be non-empty".into()));
    }
    let mut segments = raw.split(separator).map(|s| s.trim().to_string());
    let question = segments.next().unwrap_or_default();
    let options: Vec<String> = segments.collect();

    let parse_status = if options.is_empty() {
        ParseStatus::TooFewSegments
    } else if question.is_empty() || options.iter().any(|o| o.is_empty()) {
        ParseStatus::EmptySegment
    } else {
        ParseStatus::Ok
    };
    Ok(GeneratedOutput { context_id: context_id.to_string(), raw: raw.to_string(), question, options, parse_status })
}

/// Inverse of [`parse_generated`] for well-formed inputs.
pub fn join_generated(question: &str, options: &[String], separator: &str) -> String {
    let mut out = String::from(question);
    for opt in options {
        out.push(' ');
        out.push_str(separator);
        out.push(' ');
        out.push_str(opt);
    }
    out
}

/// Number of distinct options, compared exactly (case-sensitive) after
/// trimming surrounding whitespace.
pub fn unique_option_count(g: &GeneratedOutput) -> Result<usize> {
    if !g.is_parsed() {
        return Err(Error::NotParsed);
    }
    Ok(g.options.iter().map(|o| o.trim()).collect::<BTreeSet<_>>().len())
}

/// Question and context counts for one difficulty subset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubsetCounts {
    pub questions: u64,
    pub contexts: u64,
}

/// Per-subset counts for one split, indexed by [`Difficulty`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SplitCounts {
    pub subsets: [SubsetCounts; 3],
}

impl SplitCounts {
    pub const fn new(questions: [u64; 3], contexts: [u64; 3]) -> Self {
        SplitCounts {
            subsets: [
                SubsetCounts { questions: questions[0], contexts: contexts[0] },
                SubsetCounts { questions: questions[1], contexts: contexts[1] },
                SubsetCounts { questions: questions[2], contexts: contexts[2] },
            ],
        }
    }

    pub fn get(&self, d: Difficulty) -> SubsetCounts {
        self.subsets[d.index()]
    }

    pub fn total_questions(&self) -> u64 {
        self.subsets.iter().map(|s| s.questions).sum()
    }

    pub fn total_contexts(&self) -> u64 {
        self.subsets.iter().map(|s| s.contexts).sum()
    }

    pub fn question_counts(&self) -> [u64; 3] {
        [self.subsets[0].questions, self.subsets[1].questions, self.subsets[2].questions]
    }

    /// Counts questions and distinct contexts per difficulty. Examples
    /// without a difficulty label are ignored.
    pub fn from_examples<'a>(examples: impl IntoIterator<Item = &'a McqExample>) -> Self {
        let mut questions = [0u64; 3];
        let mut contexts: [BTreeSet<&str>; 3] = Default::default();
        for ex in examples {
            if let Some(d) = ex.difficulty {
                questions[d.index()] += 1;
                contexts[d.index()].insert(ex.context_id.as_str());
            }
        }
        SplitCounts::new(questions, [contexts[0].len() as u64, contexts[1].len() as u64, contexts[2].len() as u64])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SplitStats {
    pub trn: SplitCounts,
    pub dev: SplitCounts,
    pub evl: SplitCounts,
}

impl SplitStats {
    pub fn get(&self, split: Split) -> &SplitCounts {
        match split {
            Split::Trn => &self.trn,
            Split::Dev => &self.dev,
            Split::Evl => &self.evl,
        }
    }

    pub fn from_examples(examples: &[McqExample]) -> Self {
        let of = |s: Split| SplitCounts::from_examples(examples.iter().filter(|e| e.split == s));
        SplitStats { trn: of(Split::Trn), dev: of(Split::Dev), evl: of(Split::Evl) }
    }
}

/// Published RACE++ statistics (questions and contexts for M/H/C).
pub const RACE_PP_STATS: SplitStats = SplitStats {
    trn: SplitCounts::new([25_421, 62_445, 12_702], [6_409, 18_728, 2_437]),
    dev: SplitCounts::new([1_436, 3_451, 712], [368, 1_021, 136]),
    evl: SplitCounts::new([1_436, 3_498, 708], [362, 1_045, 135]),
};
