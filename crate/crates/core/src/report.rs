//! Pass/fail reports shared by the verification checks.

use crate::grid::DomainFingerprint;
use crate::specfun::Params;
use serde::{Deserialize, Serialize};

/// Relative slack applied to every inequality: 1e−10 of the larger side.
pub const SLACK: f64 = 1e-10;

/// One inequality `lhs ≤ rhs`, or a worst case over several samples of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub name: String,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// (rhs − lhs) / max(|lhs|, |rhs|); 0 when both sides vanish.
    pub margin: f64,
    pub count: usize,
}

impl Item {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let margin = if scale > 0.0 { (rhs - lhs) / scale } else { 0.0 };
        let pass = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + SLACK * scale;
        Item { name: name.into(), pass, lhs, rhs, margin, count: 1 }
    }

    /// `lhs ≤ rhs` with the slack and margin measured against an explicit scale.
    pub fn le_scaled(name: impl Into<String>, lhs: f64, rhs: f64, scale: f64) -> Self {
        let scale = scale.max(lhs.abs()).max(rhs.abs());
        let margin = if scale > 0.0 { (rhs - lhs) / scale } else { 0.0 };
        let pass = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + SLACK * scale;
        Item { name: name.into(), pass, lhs, rhs, margin, count: 1 }
    }

    pub fn ge(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let mut it = Item::le(name, rhs, lhs);
        std::mem::swap(&mut it.lhs, &mut it.rhs);
        it
    }

    /// A boolean condition with an explicit margin.
    pub fn flag(name: impl Into<String>, pass: bool, margin: f64) -> Self {
        Item { name: name.into(), pass, lhs: f64::NAN, rhs: f64::NAN, margin, count: 1 }
    }
}

/// Aggregated outcome of one check over a sample suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub params: Params,
    pub domain: Option<DomainFingerprint>,
    pub n_samples: usize,
    pub pass: bool,
    pub worst_margin: f64,
    pub ratios: Vec<f64>,
    /// Worst instance of each named inequality.
    pub items: Vec<Item>,
    /// Reported alongside but never asserted.
    pub info: Vec<Item>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(check: impl Into<String>, params: Params, domain: Option<DomainFingerprint>) -> Self {
        Report {
            check: check.into(),
            params,
            domain,
            n_samples: 0,
            pass: true,
            worst_margin: f64::INFINITY,
            ratios: Vec::new(),
            items: Vec::new(),
            info: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Merge an item, keeping the worst margin per name and any failure.
    pub fn push(&mut self, item: Item) {
        self.pass &= item.pass;
        if !item.margin.is_nan() {
            self.worst_margin = self.worst_margin.min(item.margin);
        }
        match self.items.iter_mut().find(|i| i.name == item.name) {
            Some(existing) => {
                let count = existing.count + item.count;
                let pass = existing.pass && item.pass;
                let replace = (!item.pass && existing.pass) || (item.pass == existing.pass && item.margin < existing.margin);
                if replace {
                    *existing = item;
                }
                existing.pass = pass;
                existing.count = count;
            }
            None => self.items.push(item),
        }
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = Item>) {
        for it in items {
            self.push(it);
        }
    }

    /// Fold another report for the same check into this one.
    pub fn absorb(&mut self, other: Report) {
        self.n_samples += other.n_samples;
        self.ratios.extend(other.ratios);
        self.extend(other.items);
        self.pass &= other.pass;
        for it in other.info {
            match self.info.iter_mut().find(|i| i.name == it.name) {
                Some(e) if it.margin < e.margin => *e = Item { count: e.count + 1, ..it },
                Some(e) => e.count += 1,
                None => self.info.push(it),
            }
        }
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.pass = false;
        self.notes.push(reason.into());
    }

    /// Finalize the margin of an empty report.
    pub fn finish(mut self) -> Self {
        if self.worst_margin == f64::INFINITY {
            self.worst_margin = 0.0;
        }
        self
    }
}
