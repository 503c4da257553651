//! Statistical primitives: distribution tails, conditional-independence tests,
//! the two-sided Fisher exact test, point-biserial correlation and OLS.
//!
//! Every function here is pure; identical inputs give bit-identical outputs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc, factorial::ln_factorial, gamma::gamma_ur};
use thiserror::Error;

use crate::data::{DataError, DatasetView};

/// Relative slack when comparing hypergeometric point probabilities.
pub const FISHER_RELATIVE_TOLERANCE: f64 = 1e-7;

#[derive(Error, Debug)]
pub enum StatsError {
    #[error("argument outside the function domain: {0}")]
    DomainError(String),
    #[error("sample of {n} too small for a conditioning set of size {cond}")]
    SampleTooSmall { n: usize, cond: usize },
    #[error("conditioning set is collinear")]
    SingularCorrelation,
    #[error("column `{0}` is not categorical")]
    NotCategorical(String),
    #[error("one of the two groups is empty")]
    DegenerateGroup,
    #[error("zero variance")]
    ZeroVariance,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("base rate must be positive")]
    ZeroBase,
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect: Option<f64>,
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-sided normal tail probability `2 (1 − Φ(|z|))`, computed without cancellation.
pub fn normal_two_sided(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Chi-square survival function with `k` degrees of freedom.
pub fn chisq_sf(x: f64, k: f64) -> Result<f64, StatsError> {
    if !(x >= 0.0) || !(k > 0.0) || !k.is_finite() {
        return Err(StatsError::DomainError(format!("chisq_sf(x = {x}, k = {k})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(k / 2.0, x / 2.0))
}

/// Partial correlation of columns `x` and `y` given `s`, read off a correlation matrix.
///
/// Returns `None` when `x` or `y` is a linear function of the conditioning set.
pub fn partial_correlation(x: usize, y: usize, s: &[usize], corr: &DMatrix<f64>) -> Result<Option<f64>, StatsError> {
    if s.is_empty() {
        return Ok(Some(corr[(x, y)].clamp(-1.0, 1.0)));
    }
    let k = s.len();
    let r_ss = DMatrix::from_fn(k, k, |i, j| corr[(s[i], s[j])]);
    let chol = r_ss.cholesky().ok_or(StatsError::SingularCorrelation)?;
    if chol.l_dirty().diagonal().iter().any(|d| d * d < 1e-10) {
        return Err(StatsError::SingularCorrelation);
    }
    let r_s = DMatrix::from_fn(k, 2, |i, j| corr[(s[i], if j == 0 { x } else { y })]);
    let solved = chol.solve(&r_s);
    // Schur complement of the conditioning block
    let adj = r_s.tr_mul(&solved);
    let a_xx = corr[(x, x)] - adj[(0, 0)];
    let a_yy = corr[(y, y)] - adj[(1, 1)];
    let a_xy = corr[(x, y)] - adj[(0, 1)];
    if a_xx <= 1e-12 || a_yy <= 1e-12 {
        return Ok(None);
    }
    Ok(Some((a_xy / (a_xx * a_yy).sqrt()).clamp(-1.0, 1.0)))
}

/// Fisher-z partial-correlation test of `x ⊥ y | s` over a correlation matrix estimated from `n` rows.
pub fn fisher_z_ci_test(x: usize, y: usize, s: &[usize], corr: &DMatrix<f64>, n: usize) -> Result<TestResult, StatsError> {
    if n <= s.len() + 3 {
        return Err(StatsError::SampleTooSmall { n, cond: s.len() });
    }
    let dof = (n - s.len() - 3) as f64;
    let Some(rho) = partial_correlation(x, y, s, corr)? else {
        // nothing left to explain once `s` is known
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, dof, effect: Some(0.0) });
    };
    let statistic = if rho.abs() >= 1.0 { rho.signum() * f64::INFINITY } else { dof.sqrt() * rho.atanh() };
    Ok(TestResult { statistic, p_value: normal_two_sided(statistic), dof, effect: Some(rho) })
}

/// G² likelihood-ratio test of `x ⊥ y | s` over categorical columns of a complete view.
///
/// Strata of `s` with no observations contribute nothing to the statistic;
/// degrees of freedom are `(|x|−1)(|y|−1)·Π|s_i|` regardless of sparsity.
pub fn g_squared_test(x: usize, y: usize, s: &[usize], v: &DatasetView<'_>) -> Result<TestResult, StatsError> {
    for &c in std::iter::once(&x).chain(std::iter::once(&y)).chain(s) {
        if !v.schema(c).kind.is_categorical() {
            return Err(StatsError::NotCategorical(v.name(c).to_string()));
        }
    }
    let (lx, ly) = (v.n_levels(x), v.n_levels(y));
    let strata: usize = s.iter().map(|&c| v.n_levels(c)).product();
    let cx = v.codes(x)?;
    let cy = v.codes(y)?;
    let cs: Vec<Vec<usize>> = s.iter().map(|&c| v.codes(c)).collect::<Result<_, _>>()?;
    let mut counts = vec![0u64; strata * lx * ly];
    for i in 0..v.n_rows() {
        let mut stratum = 0;
        for (col, &c) in cs.iter().zip(s) {
            stratum = stratum * v.n_levels(c) + col[i];
        }
        counts[(stratum * lx + cx[i]) * ly + cy[i]] += 1;
    }
    let mut g2 = 0.0;
    for table in counts.chunks(lx * ly) {
        let total: u64 = table.iter().sum();
        if total == 0 {
            continue;
        }
        let row = |a: usize| (0..ly).map(|b| table[a * ly + b]).sum::<u64>();
        let col = |b: usize| (0..lx).map(|a| table[a * ly + b]).sum::<u64>();
        for a in 0..lx {
            let ra = row(a);
            for b in 0..ly {
                let o = table[a * ly + b];
                if o == 0 {
                    continue;
                }
                let e = ra as f64 * col(b) as f64 / total as f64;
                g2 += o as f64 * (o as f64 / e).ln();
            }
        }
    }
    let g2 = (2.0 * g2).max(0.0);
    let dof = ((lx - 1) * (ly - 1) * strata) as f64;
    Ok(TestResult { statistic: g2, p_value: chisq_sf(g2, dof)?, dof, effect: None })
}

/// 2×2 table: rows = feature present / absent, columns = positive / negative outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Share of positive outcomes among subjects with the feature.
    pub fn positive_rate_present(&self) -> f64 {
        self.a as f64 / (self.a + self.b) as f64
    }

    pub fn positive_rate_absent(&self) -> f64 {
        self.c as f64 / (self.c + self.d) as f64
    }

    pub fn positive_rate(&self) -> f64 {
        (self.a + self.c) as f64 / self.total() as f64
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Two-sided Fisher exact test.
///
/// Sums the hypergeometric probabilities of every table with the observed
/// margins whose point probability does not exceed the observed one (up to
/// [`FISHER_RELATIVE_TOLERANCE`]). `statistic` is the observed point
/// probability; `effect` is the sample odds ratio when finite.
pub fn fisher_exact(t: &ContingencyTable2x2) -> Result<TestResult, StatsError> {
    let n = t.total();
    if n == 0 {
        return Err(StatsError::DomainError("empty contingency table".into()));
    }
    let (r1, r2, c1) = (t.a + t.b, t.c + t.d, t.a + t.c);
    let denom = ln_choose(n, c1);
    let log_p = |x: u64| ln_choose(r1, x) + ln_choose(r2, c1 - x) - denom;
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let observed = log_p(t.a);
    let cutoff = observed + FISHER_RELATIVE_TOLERANCE.ln_1p();
    let p: f64 = (lo..=hi).map(log_p).filter(|&lp| lp <= cutoff).map(f64::exp).sum();
    let odds = (t.a * t.d) as f64 / (t.b * t.c) as f64;
    Ok(TestResult {
        statistic: observed.exp(),
        p_value: p.min(1.0),
        dof: 0.0,
        effect: odds.is_finite().then_some(odds),
    })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(StatsError::DomainError("pearson needs two equal-length samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Two-sided p-value of a correlation `r` over `n` pairs via Student's t with n−2 dof.
fn correlation_t_test(r: f64, n: usize) -> (f64, f64) {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return (r.signum() * f64::INFINITY, 0.0);
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let p = if df > 0.0 { beta_reg(df / 2.0, 0.5, df / (df + t * t)) } else { 1.0 };
    (t, p)
}

/// Point-biserial correlation between a group indicator and a continuous variable.
///
/// `effect` is r, positive when the `true` group has the larger mean;
/// `statistic` is the t statistic with n−2 dof.
pub fn point_biserial(group: &[bool], x: &[f64]) -> Result<TestResult, StatsError> {
    if group.len() != x.len() {
        return Err(StatsError::DomainError("group and value lengths differ".into()));
    }
    let n = x.len();
    let n1 = group.iter().filter(|&&g| g).count();
    let n0 = n - n1;
    if n1 == 0 || n0 == 0 {
        return Err(StatsError::DegenerateGroup);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let sd_pop = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if sd_pop == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let (mut s1, mut s0) = (0.0, 0.0);
    for (&g, &v) in group.iter().zip(x) {
        if g {
            s1 += v - mean;
        } else {
            s0 += v - mean;
        }
    }
    let diff = s1 / n1 as f64 - s0 / n0 as f64;
    let r = (diff / sd_pop * ((n1 * n0) as f64).sqrt() / n as f64).clamp(-1.0, 1.0);
    let (t, p) = correlation_t_test(r, n);
    Ok(TestResult { statistic: t, p_value: p.clamp(0.0, 1.0), dof: (n - 2) as f64, effect: Some(r) })
}

/// Least-squares fit of `y` on `[1 | x]`. The intercept comes first in the result.
pub fn ols(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<DVector<f64>, StatsError> {
    let (n, p) = (x.nrows(), x.ncols() + 1);
    if y.len() != n {
        return Err(StatsError::DomainError("response length differs from design rows".into()));
    }
    if n <= p {
        return Err(StatsError::RankDeficient);
    }
    let mut design = DMatrix::from_element(n, p, 1.0);
    design.view_mut((0, 1), (n, p - 1)).copy_from(x);
    let scale = design.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = design.qr();
    let r = qr.r();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-10 * scale) {
        return Err(StatsError::RankDeficient);
    }
    let qty = qr.q().tr_mul(y);
    r.solve_upper_triangular(&qty).ok_or(StatsError::RankDeficient)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldIncrease {
    pub raw: f64,
    /// Ratio rounded to one decimal, as reported.
    pub rounded: f64,
}

/// Ratio of a subgroup's event rate to the cohort base rate.
pub fn fold_increase(rate_in_group: f64, base_rate: f64) -> Result<FoldIncrease, StatsError> {
    if !(base_rate > 0.0) {
        return Err(StatsError::ZeroBase);
    }
    let raw = rate_in_group / base_rate;
    Ok(FoldIncrease { raw, rounded: (raw * 10.0).round() / 10.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSchema, Dataset};
    use proptest::prelude::*;

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert!(normal_cdf(-8.0) < 1e-14);
        for z in [0.1, 0.7, 1.3, 2.9, 5.5] {
            assert!((normal_cdf(-z) - (1.0 - normal_cdf(z))).abs() < 1e-12);
        }
    }

    #[test]
    fn chisq_sf_reference_points() {
        assert_eq!(chisq_sf(0.0, 3.0).unwrap(), 1.0);
        assert!((chisq_sf(3.841459, 1.0).unwrap() - 0.05).abs() < 1e-6);
        assert!((chisq_sf(10.0, 10.0).unwrap() - 0.4405).abs() < 1e-4);
        assert!(matches!(chisq_sf(-1.0, 1.0), Err(StatsError::DomainError(_))));
        assert!(matches!(chisq_sf(1.0, 0.0), Err(StatsError::DomainError(_))));
    }

    #[test]
    fn fisher_exact_uninformative_table() {
        let r = fisher_exact(&ContingencyTable2x2::new(1, 1, 1, 1)).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_biserial_small_example() {
        let r = point_biserial(&[false, false, true, true], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        // Pearson of (0,0,1,1) with (1,2,3,4): 2 / sqrt(1 * 5)
        assert!((r.effect.unwrap() - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(point_biserial(&[true, true], &[1.0, 2.0]), Err(StatsError::DegenerateGroup)));
        assert!(matches!(point_biserial(&[true, false], &[1.0, 1.0]), Err(StatsError::ZeroVariance)));
    }

    #[test]
    fn point_biserial_zero_for_mirrored_groups() {
        let g = [false, false, false, true, true, true];
        let x = [4.0, 5.0, 6.0, 6.0, 5.0, 4.0];
        assert!(point_biserial(&g, &x).unwrap().effect.unwrap().abs() < 1e-15);
    }

    #[test]
    fn ols_exact_line() {
        let x = DMatrix::from_column_slice(5, 1, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_iterator(5, x.iter().map(|v| 2.0 * v + 1.0));
        let b = ols(&y, &x).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-10);
        assert!((b[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn ols_collinear_is_rank_deficient() {
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { i as f64 } else { 2.0 * i as f64 });
        let y = DVector::from_element(6, 1.0);
        assert!(matches!(ols(&y, &x), Err(StatsError::RankDeficient)));
    }

    #[test]
    fn fold_increase_rounding() {
        assert_eq!(fold_increase(0.3, 0.3).unwrap().rounded, 1.0);
        assert!(matches!(fold_increase(0.3, 0.0), Err(StatsError::ZeroBase)));
    }

    #[test]
    fn fisher_z_perfect_dependence() {
        let corr = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = fisher_z_ci_test(0, 1, &[], &corr, 100).unwrap();
        assert!(r.p_value < 1e-12);
        assert!(matches!(fisher_z_ci_test(0, 1, &[], &corr, 3), Err(StatsError::SampleTooSmall { .. })));
    }

    #[test]
    fn fisher_z_singular_conditioning_set() {
        let corr = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.3, 0.2, 0.2, 0.3, 1.0, 0.1, 0.1, 0.2, 0.1, 1.0, 1.0, 0.2, 0.1, 1.0, 1.0],
        );
        assert!(matches!(fisher_z_ci_test(0, 1, &[2, 3], &corr, 100), Err(StatsError::SingularCorrelation)));
    }

    fn binary_dataset(cols: &[&[usize]]) -> Dataset {
        let schema = (0..cols.len()).map(|i| ColumnSchema::binary(&format!("v{i}"), "c")).collect();
        let data = cols.iter().map(|c| c.iter().map(|&v| Some(v as f64)).collect()).collect();
        Dataset::new(schema, data).unwrap()
    }

    #[test]
    fn g_squared_identical_columns() {
        let x: Vec<usize> = (0..200).map(|i| (i * 7 % 3 == 0) as usize).collect();
        let d = binary_dataset(&[&x, &x]);
        let r = g_squared_test(0, 1, &[], &d.view_all()).unwrap();
        assert!(r.p_value < 1e-10);
        assert_eq!(r.dof, 1.0);
    }

    #[test]
    fn g_squared_zero_when_observed_equals_expected() {
        let x = [0, 0, 1, 1, 0, 0, 1, 1];
        let y = [0, 1, 0, 1, 0, 1, 0, 1];
        let d = binary_dataset(&[&x, &y]);
        let r = g_squared_test(0, 1, &[], &d.view_all()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn g_squared_rejects_continuous() {
        let d = Dataset::new(
            vec![ColumnSchema::continuous("a", "c"), ColumnSchema::binary("b", "c")],
            vec![vec![Some(0.5), Some(1.5)], vec![Some(0.0), Some(1.0)]],
        )
        .unwrap();
        assert!(matches!(g_squared_test(0, 1, &[], &d.view_all()), Err(StatsError::NotCategorical(_))));
    }

    #[test]
    fn g_squared_dof_counts_all_strata() {
        // stratum z = 1 is empty; dof is still (2−1)(2−1)·2
        let x = [0, 1, 0, 1, 1, 0];
        let y = [0, 1, 1, 0, 1, 0];
        let z = [0, 0, 0, 0, 0, 0];
        let d = binary_dataset(&[&x, &y, &z]);
        let r = g_squared_test(0, 1, &[2], &d.view_all()).unwrap();
        assert_eq!(r.dof, 2.0);
    }

    proptest! {
        #[test]
        fn fisher_symmetric_under_double_swap(a in 0u64..30, b in 0u64..30, c in 0u64..30, d in 0u64..30) {
            prop_assume!(a + b + c + d > 0);
            let p = fisher_exact(&ContingencyTable2x2::new(a, b, c, d)).unwrap().p_value;
            let q = fisher_exact(&ContingencyTable2x2::new(d, c, b, a)).unwrap().p_value;
            prop_assert!((p - q).abs() <= 1e-12 * p.max(1e-300) + 1e-15);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn point_biserial_affine_invariance(
            xs in proptest::collection::vec(-100.0f64..100.0, 10..40),
            scale in 0.01f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            let g: Vec<bool> = (0..xs.len()).map(|i| i % 3 == 0).collect();
            prop_assume!(xs.iter().any(|&v| (v - xs[0]).abs() > 1e-3));
            let r = point_biserial(&g, &xs).unwrap().effect.unwrap();
            let scaled: Vec<f64> = xs.iter().map(|v| v * scale + shift).collect();
            let r2 = point_biserial(&g, &scaled).unwrap().effect.unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
            let flipped: Vec<bool> = g.iter().map(|v| !v).collect();
            let r3 = point_biserial(&flipped, &xs).unwrap().effect.unwrap();
            prop_assert!((r + r3).abs() < 1e-12);
        }

        #[test]
        fn g_squared_nonnegative(x in proptest::collection::vec(0usize..2, 30), y in proptest::collection::vec(0usize..2, 30)) {
            let d = binary_dataset(&[&x, &y]);
            match g_squared_test(0, 1, &[], &d.view_all()) {
                Ok(r) => prop_assert!(r.statistic >= 0.0),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
