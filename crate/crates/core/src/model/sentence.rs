use crate::error::{Error, Result};

/// A growing sequence of symbols in `{1..K}`.
///
/// Symbols are stored zero-based; the public accessors speak 1-based
/// symbols. Terminal flags are only tracked when the grammar runs with a
/// nonzero termination weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceState {
    k: usize,
    symbols: Vec<u16>,
    terminal: Option<Vec<bool>>,
}

impl SentenceState {
    /// Builds a sentence from 1-based symbols.
    pub fn new(k: usize, symbols: &[usize]) -> Result<Self> {
        if k < 2 || k > u16::MAX as usize {
            return Err(Error::invalid(format!("unsupported alphabet size {k}")));
        }
        let symbols = symbols
            .iter()
            .map(|&s| {
                if (1..=k).contains(&s) {
                    Ok((s - 1) as u16)
                } else {
                    Err(Error::invalid(format!("symbol {s} outside 1..={k}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { k, symbols, terminal: None })
    }

    pub(crate) fn from_indices(k: usize, symbols: Vec<u16>) -> Self {
        debug_assert!(symbols.iter().all(|&s| (s as usize) < k));
        Self { k, symbols, terminal: None }
    }

    pub(crate) fn enable_terminal_tracking(&mut self) {
        self.terminal = Some(vec![false; self.symbols.len()]);
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// 1-based symbol at `site`.
    pub fn symbol(&self, site: usize) -> Result<usize> {
        self.symbols
            .get(site)
            .map(|&s| s as usize + 1)
            .ok_or(Error::Index { index: site, len: self.len() })
    }

    /// All symbols, 1-based.
    pub fn symbols(&self) -> Vec<usize> {
        self.symbols.iter().map(|&s| s as usize + 1).collect()
    }

    /// Zero-based symbol indices.
    pub fn indices(&self) -> &[u16] {
        &self.symbols
    }

    /// Overwrites `site` with the 1-based `symbol`.
    pub fn set(&mut self, site: usize, symbol: usize) -> Result<()> {
        if !(1..=self.k).contains(&symbol) {
            return Err(Error::invalid(format!("symbol {symbol} outside 1..={}", self.k)));
        }
        let len = self.len();
        let slot = self.symbols.get_mut(site).ok_or(Error::Index { index: site, len })?;
        *slot = (symbol - 1) as u16;
        Ok(())
    }

    pub(crate) fn set_index(&mut self, site: usize, symbol: u16) {
        self.symbols[site] = symbol;
    }

    pub fn is_terminal(&self, site: usize) -> bool {
        self.terminal.as_ref().is_some_and(|t| t[site])
    }

    pub(crate) fn mark_terminal(&mut self, site: usize) {
        if let Some(t) = self.terminal.as_mut() {
            t[site] = true;
        }
    }

    /// Positions still holding a nonterminal. Every position is nonterminal
    /// when terminal tracking is off.
    pub fn nonterminal_positions(&self) -> Vec<usize> {
        match &self.terminal {
            None => (0..self.len()).collect(),
            Some(t) => t.iter().enumerate().filter(|(_, &done)| !done).map(|(i, _)| i).collect(),
        }
    }

    /// Replaces the symbol at `position` with the pair `(left, right)`.
    pub(crate) fn replace_with_pair(&mut self, position: usize, left: u16, right: u16) {
        self.symbols[position] = left;
        self.symbols.insert(position + 1, right);
        if let Some(t) = self.terminal.as_mut() {
            t[position] = false;
            t.insert(position + 1, false);
        }
    }

    /// Occurrence count of each symbol, indexed zero-based.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &s in &self.symbols {
            counts[s as usize] += 1;
        }
        counts
    }
}
