//! Parameter sets and the structure derived from them.
//!
//! A [`ParameterSet`] holds the expected Bernoulli reward of every arm under
//! every type. [`derive_structure`] computes the optimal arms, gaps, elite arms
//! and the neighborhood radius used to recognise a type from an empirical
//! reward vector. [`confusion_set`] and [`classify_condition`] are the two
//! queries the known-type policies are built on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N×K matrix of expected rewards, stored row-major (one row per type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ParameterSet {
    n_types: usize,
    n_arms: usize,
    means: Vec<f64>,
}

impl ParameterSet {
    /// Builds a parameter set from rows, checking shape and that every entry
    /// lies in `[0, 1]`. Uniqueness of optima is not required here; see
    /// [`ParameterSet::has_unique_optima`].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_types = rows.len();
        let n_arms = rows.first().map_or(0, Vec::len);
        if n_types == 0 || n_arms == 0 {
            return Err(Error::EmptyParameterSet { n_types, n_arms });
        }
        let mut means = Vec::with_capacity(n_types * n_arms);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != n_arms {
                return Err(Error::RaggedRow {
                    row: x,
                    got: row.len(),
                    expected: n_arms,
                });
            }
            for (a, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::MeanOutOfRange { x, a, value });
                }
            }
            means.extend(row);
        }
        Ok(Self {
            n_types,
            n_arms,
            means,
        })
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    #[inline]
    pub fn mean(&self, x: usize, a: usize) -> f64 {
        self.means[x * self.n_arms + a]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.means[x * self.n_arms..(x + 1) * self.n_arms]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.means.chunks_exact(self.n_arms)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Row maximum.
    pub fn best_value(&self, x: usize) -> f64 {
        self.row(x).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index arm attaining the row maximum.
    pub fn best_arm(&self, x: usize) -> usize {
        argmax_lowest(self.row(x))
    }

    /// True when every row's maximum is attained by exactly one arm.
    pub fn has_unique_optima(&self) -> bool {
        (0..self.n_types).all(|x| self.tied_optimum(x).is_none())
    }

    fn tied_optimum(&self, x: usize) -> Option<(usize, usize)> {
        let best = self.best_arm(x);
        let value = self.mean(x, best);
        self.row(x)
            .iter()
            .enumerate()
            .find(|&(a, &v)| a != best && v == value)
            .map(|(a, _)| (best, a))
    }

    fn check_type(&self, x: usize) -> Result<()> {
        if x >= self.n_types {
            return Err(Error::TypeOutOfRange {
                x,
                n_types: self.n_types,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for ParameterSet {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<ParameterSet> for Vec<Vec<f64>> {
    fn from(params: ParameterSet) -> Self {
        params.to_rows()
    }
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Cached quantities of a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedStructure {
    pub best_arm: Vec<usize>,
    pub best_value: Vec<f64>,
    /// Row-major N×K gaps.
    pub gaps: Vec<f64>,
    pub epsilon_star: f64,
    /// Sorted, deduplicated optimal arms.
    pub elite: Vec<usize>,
    /// `confusion[x]` is B(x), the exact confusion set.
    pub confusion: Vec<Vec<usize>>,
    n_arms: usize,
}

impl DerivedStructure {
    #[inline]
    pub fn gap(&self, x: usize, a: usize) -> f64 {
        self.gaps[x * self.n_arms + a]
    }

    pub fn n_types(&self) -> usize {
        self.best_arm.len()
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn is_elite(&self, a: usize) -> bool {
        self.elite.binary_search(&a).is_ok()
    }
}

/// Computes optimal arms, gaps, ε*, the elite set and exact confusion sets.
///
/// Fails on a row with a tied maximum.
pub fn derive_structure(params: &ParameterSet) -> Result<DerivedStructure> {
    for x in 0..params.n_types() {
        if let Some((first, second)) = params.tied_optimum(x) {
            return Err(Error::TiedOptimum { x, first, second });
        }
    }
    Ok(derive_unchecked(params))
}

/// Same as [`derive_structure`] but accepts tied maxima, resolving them to the
/// lowest arm index. Used for estimated parameter sets, where exact ties are
/// an artefact of finite samples rather than a modelling error.
pub fn derive_structure_lenient(params: &ParameterSet) -> DerivedStructure {
    derive_unchecked(params)
}

fn derive_unchecked(params: &ParameterSet) -> DerivedStructure {
    let n = params.n_types();
    let k = params.n_arms();
    let best_arm: Vec<usize> = (0..n).map(|x| params.best_arm(x)).collect();
    let best_value: Vec<f64> = (0..n).map(|x| params.mean(x, best_arm[x])).collect();
    let mut gaps = Vec::with_capacity(n * k);
    for x in 0..n {
        gaps.extend(params.row(x).iter().map(|&v| best_value[x] - v));
    }
    let mut elite = best_arm.clone();
    elite.sort_unstable();
    elite.dedup();

    if has_duplicate_rows(params) {
        log::warn!("parameter set contains duplicate rows; condition matches resolve to the lowest type index");
    }

    let confusion = (0..n)
        .map(|x| exact_confusion(params, &best_arm, x))
        .collect();

    DerivedStructure {
        best_arm,
        best_value,
        gaps,
        epsilon_star: epsilon_star(params),
        elite,
        confusion,
        n_arms: k,
    }
}

fn has_duplicate_rows(params: &ParameterSet) -> bool {
    let rows: Vec<&[f64]> = params.rows().collect();
    rows.iter()
        .enumerate()
        .any(|(i, r)| rows[i + 1..].iter().any(|s| s == r))
}

/// Half the smallest distance between distinct values in the matrix. With a
/// single distinct value any radius keeps neighborhoods disjoint; 0.5 is used.
pub fn epsilon_star(params: &ParameterSet) -> f64 {
    let mut values = params.means.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |m| m.min(d))))
        .map_or(0.5, |gap| gap / 2.0)
}

fn exact_confusion(params: &ParameterSet, best_arm: &[usize], x: usize) -> Vec<usize> {
    let ax = best_arm[x];
    let vx = params.mean(x, ax);
    (0..params.n_types())
        .filter(|&z| z != x && params.mean(z, ax) == vx && best_arm[z] != ax)
        .collect()
}

/// B(x) for `delta == 0`, otherwise the widened B(x, δ). Never contains `x`.
///
/// Optimal arms are taken as the lowest-index row maximum, so this also works
/// on estimated parameter sets with ties.
pub fn confusion_set(params: &ParameterSet, x: usize, delta: f64) -> Result<Vec<usize>> {
    params.check_type(x)?;
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    if delta == 0.0 {
        let best: Vec<usize> = (0..params.n_types()).map(|z| params.best_arm(z)).collect();
        return Ok(exact_confusion(params, &best, x));
    }
    let tol = 2.0 * delta;
    let k = params.n_arms();
    let row_x = params.row(x);
    let sup_x = params.best_value(x);
    let members = (0..params.n_types())
        .filter(|&z| z != x)
        .filter(|&z| {
            let row_z = params.row(z);
            (0..k).any(|a_prime| {
                row_x[a_prime] >= sup_x - tol
                    && (row_z[a_prime] - row_x[a_prime]).abs() <= tol
                    && (0..k).any(|a| a != a_prime && row_z[a] > row_z[a_prime] - tol)
            })
        })
        .collect();
    Ok(members)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2,
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionVerdict {
    pub tag: Condition,
    /// Present exactly for C1 and C2.
    pub matched_type: Option<usize>,
}

impl ConditionVerdict {
    pub fn c3() -> Self {
        Self {
            tag: Condition::C3,
            matched_type: None,
        }
    }
}

/// Classifies an empirical mean vector against the exact confusion sets B(x).
pub fn classify_condition(
    derived: &DerivedStructure,
    params: &ParameterSet,
    empirical: &[f64],
    pulled_all: bool,
) -> Result<ConditionVerdict> {
    let nonempty: Vec<bool> = derived.confusion.iter().map(|b| !b.is_empty()).collect();
    classify_against(params, derived.epsilon_star, &nonempty, empirical, pulled_all)
}

/// Classification with caller-supplied ε* and confusion-set emptiness.
pub fn classify_against(
    params: &ParameterSet,
    epsilon_star: f64,
    confusion_nonempty: &[bool],
    empirical: &[f64],
    pulled_all: bool,
) -> Result<ConditionVerdict> {
    if empirical.len() != params.n_arms() {
        return Err(Error::LengthMismatch {
            expected: params.n_arms(),
            got: empirical.len(),
        });
    }
    if !pulled_all {
        return Err(Error::InvalidArgument(
            "every arm must be pulled before classification".into(),
        ));
    }
    let matched = params.rows().position(|row| {
        row.iter()
            .zip(empirical)
            .all(|(&theta, &mu)| (mu - theta).abs() < epsilon_star)
    });
    Ok(match matched {
        Some(x) if confusion_nonempty[x] => ConditionVerdict {
            tag: Condition::C2,
            matched_type: Some(x),
        },
        Some(x) => ConditionVerdict {
            tag: Condition::C1,
            matched_type: Some(x),
        },
        None => ConditionVerdict::c3(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{fig1_parameter_set, fig2_parameter_set};
    use approx::assert_abs_diff_eq;

    #[test]
    fn fig2_structure() {
        let p = fig2_parameter_set();
        let d = derive_structure(&p).unwrap();
        assert_eq!(d.best_arm, vec![0, 1]);
        assert_eq!(d.elite, vec![0, 1]);
        assert_eq!(d.gap(0, 0), 0.0);
        for a in 1..4 {
            assert_abs_diff_eq!(d.gap(0, a), 0.1, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.epsilon_star, 0.05, epsilon = 1e-12);
        assert!(d.confusion.iter().all(Vec::is_empty));
    }

    #[test]
    fn fig1_structure() {
        let p = fig1_parameter_set();
        let d = derive_structure(&p).unwrap();
        assert_abs_diff_eq!(d.epsilon_star, 0.025, epsilon = 1e-12);
        assert_eq!(d.elite, (0..21).collect::<Vec<_>>());
        assert_eq!(d.confusion[0], (1..21).collect::<Vec<_>>());
        for x in 1..21 {
            assert!(d.confusion[x].is_empty(), "B({x}) should be empty");
        }
    }

    #[test]
    fn rejects_ties_and_empty() {
        let p = ParameterSet::new(vec![vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            derive_structure(&p),
            Err(Error::TiedOptimum { x: 0, .. })
        ));
        assert!(matches!(
            ParameterSet::new(vec![]),
            Err(Error::EmptyParameterSet { .. })
        ));
        assert!(matches!(
            ParameterSet::new(vec![vec![]]),
            Err(Error::EmptyParameterSet { .. })
        ));
        assert!(matches!(
            ParameterSet::new(vec![vec![0.5, 1.2]]),
            Err(Error::MeanOutOfRange { a: 1, .. })
        ));
        assert!(matches!(
            ParameterSet::new(vec![vec![0.5, 0.2], vec![0.1]]),
            Err(Error::RaggedRow { row: 1, .. })
        ));
    }

    #[test]
    fn lenient_derive_breaks_ties_low() {
        let p = ParameterSet::new(vec![vec![0.4, 0.7, 0.7]]).unwrap();
        let d = derive_structure_lenient(&p);
        assert_eq!(d.best_arm, vec![1]);
    }

    #[test]
    fn single_type_has_empty_confusion() {
        let p = ParameterSet::new(vec![vec![0.2, 0.9, 0.4]]).unwrap();
        let d = derive_structure(&p).unwrap();
        assert!(d.confusion[0].is_empty());
        assert!(confusion_set(&p, 0, 0.3).unwrap().is_empty());
        let v = classify_condition(&d, &p, &[0.2, 0.9, 0.4], true).unwrap();
        assert_eq!(v.tag, Condition::C1);
    }

    #[test]
    fn constant_matrix_epsilon() {
        let p = ParameterSet::new(vec![vec![0.3], vec![0.3]]).unwrap();
        assert_eq!(epsilon_star(&p), 0.5);
    }

    #[test]
    fn confusion_examples() {
        let f1 = fig1_parameter_set();
        let f2 = fig2_parameter_set();
        assert_eq!(confusion_set(&f1, 0, 0.0).unwrap(), (1..21).collect::<Vec<_>>());
        assert!(confusion_set(&f1, 7, 0.0).unwrap().is_empty());
        assert!(confusion_set(&f2, 0, 0.01).unwrap().is_empty());
        assert_eq!(confusion_set(&f1, 0, 0.01).unwrap(), (1..21).collect::<Vec<_>>());
        assert!(matches!(
            confusion_set(&f2, 2, 0.0),
            Err(Error::TypeOutOfRange { x: 2, .. })
        ));
        assert!(confusion_set(&f2, 0, -0.1).is_err());
    }

    #[test]
    fn classify_examples() {
        let f2 = fig2_parameter_set();
        let d2 = derive_structure(&f2).unwrap();
        let v = classify_condition(&d2, &f2, &[0.59, 0.51, 0.49, 0.52], true).unwrap();
        assert_eq!(v, ConditionVerdict { tag: Condition::C1, matched_type: Some(0) });
        let v = classify_condition(&d2, &f2, &[0.70, 0.50, 0.50, 0.50], true).unwrap();
        assert_eq!(v, ConditionVerdict::c3());

        let f1 = fig1_parameter_set();
        let d1 = derive_structure(&f1).unwrap();
        let mut emp = vec![0.49; 21];
        emp[0] = 0.56;
        let v = classify_condition(&d1, &f1, &emp, true).unwrap();
        assert_eq!(v, ConditionVerdict { tag: Condition::C2, matched_type: Some(0) });

        assert!(matches!(
            classify_condition(&d2, &f2, &[0.5, 0.5], true),
            Err(Error::LengthMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn duplicate_rows_match_lowest_index() {
        let p = ParameterSet::new(vec![
            vec![0.2, 0.8],
            vec![0.9, 0.1],
            vec![0.9, 0.1],
        ])
        .unwrap();
        let d = derive_structure(&p).unwrap();
        let v = classify_condition(&d, &p, &[0.9, 0.1], true).unwrap();
        assert_eq!(v.matched_type, Some(1));
    }
}
