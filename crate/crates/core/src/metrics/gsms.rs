use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::cdl::{canonicalize, CdlDocument, SymmetryTable};

/// Statement-level agreement of one predicted document with its gold document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsmsMatch {
    pub matched: usize,
    pub total: usize,
    pub perfect: bool,
}

impl GsmsMatch {
    /// Result for a prediction that could not be parsed at all.
    pub fn unparseable(gold: &CdlDocument, table: &SymmetryTable) -> Self {
        Self {
            matched: 0,
            total: canonicalize(gold, table).len(),
            perfect: false,
        }
    }

    /// Per-sample average-accuracy contribution as an exact ratio.
    /// An empty gold document counts as fully matched only when the
    /// prediction is empty too.
    fn accuracy(&self) -> BigRational {
        if self.total == 0 {
            let v = if self.perfect { 1 } else { 0 };
            BigRational::from_integer(BigInt::from(v))
        } else {
            BigRational::new(BigInt::from(self.matched), BigInt::from(self.total))
        }
    }
}

/// Matches canonicalized statements by byte equality of their serialized form.
/// `perfect` requires every gold statement matched and no extra predictions.
pub fn gsms_match(pred: &CdlDocument, gold: &CdlDocument, table: &SymmetryTable) -> Result<GsmsMatch, MetricsError> {
    if pred.role != gold.role {
        return Err(MetricsError::RoleMismatch {
            pred: pred.role,
            gold: gold.role,
        });
    }
    let pred = canonicalize(pred, table);
    let gold = canonicalize(gold, table);
    let gold_set: HashSet<String> = gold.statements.iter().map(|s| s.to_text()).collect();
    let matched = pred
        .statements
        .iter()
        .filter(|s| gold_set.contains(&s.to_text()))
        .count();
    let total = gold.len();
    Ok(GsmsMatch {
        matched,
        total,
        perfect: matched == total && pred.len() == total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GsmsSample {
    pub id: String,
    pub cons: GsmsMatch,
    pub img: GsmsMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsmsSampleRow {
    pub id: String,
    pub c_matched: usize,
    pub c_total: usize,
    pub i_matched: usize,
    pub i_total: usize,
    pub c_perfect: bool,
    pub i_perfect: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsmsAggregate {
    pub c_aa: f64,
    pub c_pa: f64,
    pub i_aa: f64,
    pub i_pa: f64,
    pub ci_pa: f64,
}

impl GsmsAggregate {
    /// `C-AA C-PA I-AA I-PA CI-PA` as percentages with two decimals.
    pub fn percent_line(&self) -> String {
        [self.c_aa, self.c_pa, self.i_aa, self.i_pa, self.ci_pa]
            .iter()
            .map(|v| format!("{:.2}", v * 100.0))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsmsReport {
    #[serde(flatten)]
    pub aggregate: GsmsAggregate,
    pub per_sample: Vec<GsmsSampleRow>,
}

impl GsmsReport {
    /// Recomputes the aggregate from the per-sample rows.
    pub fn from_rows(rows: Vec<GsmsSampleRow>) -> Result<Self, MetricsError> {
        if rows.is_empty() {
            return Err(MetricsError::EmptySamples);
        }
        let n = BigRational::from_integer(BigInt::from(rows.len()));
        let mut c_aa = BigRational::zero();
        let mut i_aa = BigRational::zero();
        let (mut c_pa, mut i_pa, mut ci_pa) = (0usize, 0usize, 0usize);
        for row in &rows {
            let cons = GsmsMatch {
                matched: row.c_matched,
                total: row.c_total,
                perfect: row.c_perfect,
            };
            let img = GsmsMatch {
                matched: row.i_matched,
                total: row.i_total,
                perfect: row.i_perfect,
            };
            c_aa += cons.accuracy();
            i_aa += img.accuracy();
            c_pa += usize::from(row.c_perfect);
            i_pa += usize::from(row.i_perfect);
            ci_pa += usize::from(row.c_perfect && row.i_perfect);
        }
        let frac = |count: usize| BigRational::new(BigInt::from(count), n.numer().clone());
        let to_f64 = |r: BigRational| r.to_f64().unwrap_or(f64::NAN);
        let aggregate = GsmsAggregate {
            c_aa: to_f64(c_aa / &n),
            c_pa: to_f64(frac(c_pa)),
            i_aa: to_f64(i_aa / &n),
            i_pa: to_f64(frac(i_pa)),
            ci_pa: to_f64(frac(ci_pa)),
        };
        Ok(Self {
            aggregate,
            per_sample: rows,
        })
    }
}

/// Folds per-sample match counts into the five GSMS fractions. Counts are
/// accumulated exactly, so the result does not depend on sample order.
pub fn gsms_aggregate(samples: &[GsmsSample]) -> Result<GsmsReport, MetricsError> {
    let rows = samples
        .iter()
        .map(|s| GsmsSampleRow {
            id: s.id.clone(),
            c_matched: s.cons.matched,
            c_total: s.cons.total,
            i_matched: s.img.matched,
            i_total: s.img.total,
            c_perfect: s.cons.perfect,
            i_perfect: s.img.perfect,
        })
        .collect();
    GsmsReport::from_rows(rows)
}
