//! Corpus data model and UCI bag-of-words ingestion.
//!
//! A docword file starts with three integer lines `D`, `W`, `NNZ`, followed by
//! `NNZ` triples `docId wordId count` with 1-based ids. Each triple expands to
//! `count` contiguous tokens appended to its document, in file order. The
//! vocabulary file holds one term per line; line number minus one is the
//! word id.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DOCWORD_FILE: &str = "docword.txt";
pub const VOCAB_FILE: &str = "vocab.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Argument("vocabulary must contain at least one term".into()));
        }
        let mut seen = HashSet::with_capacity(terms.len());
        for t in &terms {
            if !seen.insert(t.as_str()) {
                return Err(Error::Argument(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(Vocabulary { terms })
    }

    /// Placeholder terms `w0 .. w{size-1}` for synthetic corpora.
    pub fn synthetic(size: usize) -> Result<Self> {
        Self::new((0..size).map(|u| format!("w{u}")).collect())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub tokens: Vec<usize>,
}

impl Document {
    pub fn new(tokens: Vec<usize>) -> Self {
        Document { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Sorted `(word, count)` pairs.
    pub fn word_counts(&self) -> Vec<(usize, usize)> {
        let mut words = self.tokens.clone();
        words.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for w in words {
            match out.last_mut() {
                Some((last, c)) if *last == w => *c += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
    vocab: Vocabulary,
    total_tokens: usize,
}

impl Corpus {
    pub fn new(docs: Vec<Document>, vocab: Vocabulary) -> Result<Self> {
        let v = vocab.len();
        for (j, d) in docs.iter().enumerate() {
            if let Some(&w) = d.tokens.iter().find(|&&w| w >= v) {
                return Err(Error::Argument(format!(
                    "document {j} contains word id {w} outside vocabulary of size {v}"
                )));
            }
        }
        let total_tokens = docs.iter().map(Document::len).sum();
        Ok(Corpus { docs, vocab, total_tokens })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn doc(&self, j: usize) -> &Document {
        &self.docs[j]
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of documents `M`.
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    /// Total token count `N`.
    pub fn num_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// New corpus over the same vocabulary holding the documents at `indices`.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        let docs: Vec<Document> = indices.iter().map(|&j| self.docs[j].clone()).collect();
        let total_tokens = docs.iter().map(Document::len).sum();
        Corpus { docs, vocab: self.vocab.clone(), total_tokens }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub heldout: usize,
    pub seed: u64,
}

/// Result of [`split_heldout`]; the index lists refer to the source corpus.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Corpus,
    pub heldout: Corpus,
    pub train_indices: Vec<usize>,
    pub heldout_indices: Vec<usize>,
}

/// Seeded held-out split. Documents are shuffled with the seed; the last
/// `heldout` shuffled documents are held out. Both halves keep the source
/// corpus's relative document order.
pub fn split_heldout(corpus: &Corpus, spec: SplitSpec) -> Result<Split> {
    let m = corpus.num_docs();
    if spec.heldout >= m && !(spec.heldout == 0 && m == 0) {
        return Err(Error::Argument(format!(
            "held-out count {} must be smaller than document count {m}",
            spec.heldout
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);
    let (train_part, held_part) = order.split_at(m - spec.heldout);
    let mut train_indices = train_part.to_vec();
    let mut heldout_indices = held_part.to_vec();
    train_indices.sort_unstable();
    heldout_indices.sort_unstable();
    Ok(Split {
        train: corpus.subset(&train_indices),
        heldout: corpus.subset(&heldout_indices),
        train_indices,
        heldout_indices,
    })
}

fn parse_header_value(line_no: usize, line: &str, what: &str) -> Result<usize> {
    line.trim()
        .parse::<usize>()
        .map_err(|_| Error::format(line_no, format!("expected {what} header, found {line:?}")))
}

/// Parse a UCI bag-of-words docword stream and its vocabulary stream.
pub fn load_uci_bag_of_words<D: BufRead, V: BufRead>(docword: D, vocab: V) -> Result<Corpus> {
    let mut lines = docword
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));

    let mut header = [0usize; 3];
    for (slot, what) in header.iter_mut().zip(["D", "W", "NNZ"]) {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| Error::format(0, format!("missing {what} header")))?;
        let line = line.map_err(|e| Error::format(line_no, e.to_string()))?;
        *slot = parse_header_value(line_no, &line, what)?;
    }
    let [num_docs, num_words, nnz] = header;

    let mut docs = vec![Document::default(); num_docs];
    let mut seen = 0usize;
    for (line_no, line) in lines {
        let line = line.map_err(|e| Error::format(line_no, e.to_string()))?;
        if seen == nnz {
            return Err(Error::format(line_no, format!("more than NNZ={nnz} triples")));
        }
        let mut fields = line.split_whitespace();
        let mut next = |what: &str| -> Result<i64> {
            let f = fields
                .next()
                .ok_or_else(|| Error::format(line_no, format!("missing {what}")))?;
            f.parse::<i64>()
                .map_err(|_| Error::format(line_no, format!("{what} {f:?} is not an integer")))
        };
        let doc_id = next("docId")?;
        let word_id = next("wordId")?;
        let count = next("count")?;
        if fields.next().is_some() {
            return Err(Error::format(line_no, "expected exactly three fields"));
        }
        if doc_id < 1 || doc_id as u64 > num_docs as u64 {
            return Err(Error::range(line_no, format!("docId {doc_id} outside [1, {num_docs}]")));
        }
        if word_id < 1 || word_id as u64 > num_words as u64 {
            return Err(Error::range(line_no, format!("wordId {word_id} outside [1, {num_words}]")));
        }
        if count <= 0 {
            return Err(Error::format(line_no, format!("count {count} must be positive")));
        }
        let doc = &mut docs[(doc_id - 1) as usize];
        doc.tokens.extend(std::iter::repeat_n((word_id - 1) as usize, count as usize));
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::format(0, format!("header declares NNZ={nnz} but found {seen} triples")));
    }

    let mut terms = Vec::with_capacity(num_words);
    for (i, line) in vocab.lines().enumerate() {
        let line = line.map_err(|e| Error::format(i + 1, e.to_string()))?;
        terms.push(line.trim_end_matches('\r').to_string());
    }
    // Tolerate one trailing empty line.
    if terms.len() == num_words + 1 && terms.last().is_some_and(|t| t.is_empty()) {
        terms.pop();
    }
    if terms.len() != num_words {
        return Err(Error::format(
            0,
            format!("vocabulary has {} terms but header declares W={num_words}", terms.len()),
        ));
    }
    let vocab = Vocabulary::new(terms).map_err(|e| Error::format(0, e.to_string()))?;
    Corpus::new(docs, vocab)
}

/// Write `corpus` in UCI docword format. Word ids within a document are
/// emitted in ascending order.
pub fn write_docword<W: Write>(corpus: &Corpus, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    let per_doc: Vec<Vec<(usize, usize)>> = corpus.docs().iter().map(Document::word_counts).collect();
    let nnz: usize = per_doc.iter().map(Vec::len).sum();
    writeln!(out, "{}", corpus.num_docs())?;
    writeln!(out, "{}", corpus.vocab_size())?;
    writeln!(out, "{nnz}")?;
    for (j, counts) in per_doc.iter().enumerate() {
        for &(w, c) in counts {
            writeln!(out, "{} {} {}", j + 1, w + 1, c)?;
        }
    }
    out.flush()
}

pub fn write_vocab<W: Write>(vocab: &Vocabulary, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for t in vocab.terms() {
        writeln!(out, "{t}")?;
    }
    out.flush()
}

/// Write `docword.txt` and `vocab.txt` under `dir`, creating it if needed.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let dw = dir.join(DOCWORD_FILE);
    let f = File::create(&dw).map_err(|e| Error::io(&dw, e))?;
    write_docword(corpus, f).map_err(|e| Error::io(&dw, e))?;
    let vp = dir.join(VOCAB_FILE);
    let f = File::create(&vp).map_err(|e| Error::io(&vp, e))?;
    write_vocab(corpus.vocab(), f).map_err(|e| Error::io(&vp, e))
}

/// Load a docword file and vocabulary file pair.
pub fn read_corpus_files(docword: &Path, vocab: &Path) -> Result<Corpus> {
    let dw = File::open(docword).map_err(|e| Error::io(docword, e))?;
    let vf = File::open(vocab).map_err(|e| Error::io(vocab, e))?;
    load_uci_bag_of_words(BufReader::new(dw), BufReader::new(vf))
}

/// Read a corpus directory written by [`write_corpus`].
pub fn read_corpus(dir: &Path) -> Result<Corpus> {
    read_corpus_files(&dir.join(DOCWORD_FILE), &dir.join(VOCAB_FILE))
}
