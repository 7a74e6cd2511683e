//! The `f_T` family used for the value-oracle hardness bound, as an
//! executable oracle, plus an exhaustive certifier of its four properties.
//!
//! `f_T(S)` depends on `S` only through `a = |S ∩ T|` and `b = |S \ T|`, so all
//! properties over the `2^|N|` subsets reduce to checks on the `(a, b)` lattice.

use std::fmt;
use std::io;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{check_set, IndexSet, ValueOracle};

const SLACK: f64 = 1e-12;

/// `(γ, ε′, k)` with derived ground size `⌈3k/ε′⌉` and `g = ⌈ε′k + 3k²/|N|⌉`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardnessParams {
    gamma: f64,
    eps_prime: Ratio<u64>,
    k: u64,
    n_size: u64,
    g: u64,
}

impl HardnessParams {
    /// Parameters satisfying `ε′ ∈ (0, 1/6)`, `γ ∈ (0, 1]` and `k ≥ 1/ε′`.
    pub fn new(gamma: f64, eps_prime: Ratio<u64>, k: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::param("gamma", format!("must lie in (0, 1], got {gamma}")));
        }
        if *eps_prime.numer() == 0 || eps_prime >= Ratio::new(1, 6) {
            return Err(Error::param("eps_prime", format!("must lie in (0, 1/6), got {eps_prime}")));
        }
        if Ratio::from_integer(k) * eps_prime < Ratio::from_integer(1) {
            return Err(Error::param("k", format!("need k >= 1/eps_prime, got k = {k}, eps_prime = {eps_prime}")));
        }
        let n_size = (Ratio::from_integer(3 * k) / eps_prime).ceil().to_integer();
        let g = (eps_prime * Ratio::from_integer(k) + Ratio::new(3 * k * k, n_size))
            .ceil()
            .to_integer();
        if g > (k - 2).min((Ratio::from_integer(3 * k) * eps_prime).floor().to_integer()) {
            return Err(Error::Numerical(format!("derived g = {g} violates g <= min{{k-2, 3 eps' k}}")));
        }
        Ok(Self {
            gamma,
            eps_prime,
            k,
            n_size,
            g,
        })
    }

    /// Unvalidated parameters for small synthetic oracles; `g < k` is the
    /// only requirement. The properties are not guaranteed for these.
    pub fn synthetic(gamma: f64, k: u64, n_size: u64, g: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) || g >= k || k > n_size {
            return Err(Error::param("synthetic", "need gamma in (0, 1] and g < k <= n_size"));
        }
        Ok(Self {
            gamma,
            eps_prime: Ratio::new(0, 1),
            k,
            n_size,
            g,
        })
    }

    /// Copy with `g` replaced, for mutation testing of the certifier.
    pub fn with_g(mut self, g: u64) -> Self {
        self.g = g;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps_prime(&self) -> Ratio<u64> {
        self.eps_prime
    }

    pub fn eps_prime_f64(&self) -> f64 {
        self.eps_prime.to_f64().unwrap_or(0.0)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn ground_size(&self) -> u64 {
        self.n_size
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    fn span(&self) -> f64 {
        (self.k - self.g) as f64
    }
}

impl fmt::Display for HardnessParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma={} eps_prime={} k={} n={} g={}",
            self.gamma, self.eps_prime, self.k, self.n_size, self.g
        )
    }
}

/// `t_T = b + min{g, a}`.
pub fn t_t(a: u64, b: u64, p: &HardnessParams) -> u64 {
    b + p.g.min(a)
}

/// `(1 − γ/(k−g))^{min{t, k}}`.
pub fn f1(a: u64, b: u64, p: &HardnessParams) -> f64 {
    let t = t_t(a, b, p).min(p.k);
    (1.0 - p.gamma / p.span()).powi(t as i32)
}

/// `1 − min{[t − k]^+, k−g}/(k−g)`.
pub fn f2(a: u64, b: u64, p: &HardnessParams) -> f64 {
    let over = t_t(a, b, p).saturating_sub(p.k);
    1.0 - over.min(p.k - p.g) as f64 / p.span()
}

/// `1 − min{|S| − t, k−g}/(k−g)`, with `|S| − t = [a − g]^+`.
pub fn f3(a: u64, _b: u64, p: &HardnessParams) -> f64 {
    let hidden = a.saturating_sub(p.g);
    1.0 - hidden.min(p.k - p.g) as f64 / p.span()
}

/// `f_T = 1 − f1·f2·f3` on the count pair `(|S ∩ T|, |S \ T|)`.
pub fn f_t_counts(a: u64, b: u64, p: &HardnessParams) -> f64 {
    1.0 - f1(a, b, p) * f2(a, b, p) * f3(a, b, p)
}

/// `f_T(S)` for explicit sets.
pub fn f_t_value(set: &IndexSet, t: &IndexSet, p: &HardnessParams) -> f64 {
    let a = set.intersection_size(t) as u64;
    let b = set.len() as u64 - a;
    f_t_counts(a, b, p)
}

/// `max_{|S| ≤ k_cap} f_∅(S) = 1 − (1 − γ/(k−g))^{k_cap}`.
pub fn f_empty_max(p: &HardnessParams, k_cap: u64) -> Result<f64> {
    if k_cap > p.k {
        return Err(Error::param("k_cap", format!("must not exceed k = {}", p.k)));
    }
    Ok(1.0 - (1.0 - p.gamma / p.span()).powi(k_cap as i32))
}

/// `f_T` as a value oracle over the ground set `{0, .., |N|−1}`.
#[derive(Debug, Clone)]
pub struct HardnessOracle {
    params: HardnessParams,
    hidden: IndexSet,
}

impl HardnessOracle {
    pub fn new(params: HardnessParams, hidden: IndexSet) -> Result<Self> {
        let n = params.n_size as usize;
        check_set(&hidden, n)?;
        if hidden.len() as u64 > params.k {
            return Err(Error::param("T", format!("|T| = {} exceeds k = {}", hidden.len(), params.k)));
        }
        let hidden = IndexSet::from_ids(n, hidden.iter())?;
        Ok(Self { params, hidden })
    }

    pub fn params(&self) -> &HardnessParams {
        &self.params
    }

    pub fn hidden(&self) -> &IndexSet {
        &self.hidden
    }
}

impl ValueOracle for HardnessOracle {
    fn ground_size(&self) -> usize {
        self.params.n_size as usize
    }

    fn value(&self, set: &IndexSet) -> Result<f64> {
        check_set(set, self.ground_size())?;
        Ok(f_t_value(set, &self.hidden, &self.params))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    P1Monotone,
    P1WeakDr,
    P2UpperBound,
    P3EmptyMax,
    P4SameAsEmpty,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::P1Monotone => "P1a",
            Property::P1WeakDr => "P1b",
            Property::P2UpperBound => "P2",
            Property::P3EmptyMax => "P3",
            Property::P4SameAsEmpty => "P4",
        })
    }
}

/// Whether the added element lies in `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AddedElement {
    InT,
    OutsideT,
}

/// A lattice configuration violating a property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub a_a: u64,
    pub b_a: u64,
    pub a_b: Option<u64>,
    pub b_b: Option<u64>,
    pub added: Option<AddedElement>,
    /// The two sides of the violated inequality.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub property: Property,
    pub passed: bool,
    pub checked: u64,
    pub witness: Option<Witness>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub params: HardnessParams,
    pub t_size: u64,
    pub checks: Vec<PropertyCheck>,
    /// `max f_∅` over `|S| ≤ k`.
    pub empty_max: f64,
    /// Whether the tighter `1 − e^{−γ} + 8ε′` bound also held.
    pub tight_p3: bool,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, property: Property) -> &PropertyCheck {
        self.checks
            .iter()
            .find(|c| c.property == property)
            .expect("every property is checked")
    }

    /// CSV with header `property,params,t_size,status,checked,a_A,b_A,a_B,b_B,u_case,lhs,rhs,note`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        write_certification_csv(std::slice::from_ref(self), writer)
    }
}

#[derive(Serialize)]
struct CertRow<'a> {
    property: String,
    params: String,
    t_size: u64,
    status: &'static str,
    checked: u64,
    #[serde(rename = "a_A")]
    a_a: Option<u64>,
    #[serde(rename = "b_A")]
    b_a: Option<u64>,
    #[serde(rename = "a_B")]
    a_b: Option<u64>,
    #[serde(rename = "b_B")]
    b_b: Option<u64>,
    u_case: Option<AddedElement>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    note: &'a str,
}

/// Writes several reports into one CSV table.
pub fn write_certification_csv<W: io::Write>(reports: &[CertificationReport], writer: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for report in reports {
        for check in &report.checks {
            let w = check.witness;
            out.serialize(CertRow {
                property: check.property.to_string(),
                params: report.params.to_string(),
                t_size: report.t_size,
                status: if check.passed { "PASS" } else { "FAIL" },
                checked: check.checked,
                a_a: w.map(|w| w.a_a),
                b_a: w.map(|w| w.b_a),
                a_b: w.and_then(|w| w.a_b),
                b_b: w.and_then(|w| w.b_b),
                u_case: w.and_then(|w| w.added),
                lhs: w.map(|w| w.lhs),
                rhs: w.map(|w| w.rhs),
                note: &check.note,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Exhaustive lattice certification of the construction at `params` with a
/// hidden set of size `t_size`.
pub fn certify_properties(params: &HardnessParams, t_size: u64) -> Result<CertificationReport> {
    certify_with(params, t_size, |a, b| f_t_counts(a, b, params))
}

/// Certifies the property claims for `params` against an arbitrary function
/// of `(|S ∩ T|, |S \ T|)`, e.g. a tampered construction.
pub fn certify_with<F>(params: &HardnessParams, t_size: u64, f: F) -> Result<CertificationReport>
where
    F: Fn(u64, u64) -> f64,
{
    if t_size > params.k {
        return Err(Error::param("t_size", format!("|T| = {t_size} exceeds k = {}", params.k)));
    }
    let n = params.n_size;
    let k = params.k;
    let g = params.g;
    let gamma = params.gamma;
    let a_max = t_size;
    let b_max = n - t_size;
    let cols = (b_max + 1) as usize;
    let idx = |a: u64, b: u64| a as usize * cols + b as usize;

    let mut table = vec![0.0; (a_max as usize + 1) * cols];
    for a in 0..=a_max {
        for b in 0..=b_max {
            table[idx(a, b)] = f(a, b);
        }
    }
    // f_∅(S) is the same construction seen with T = ∅, i.e. a = 0, b = |S|
    let empty_params_f = |s: u64| f(0, s);

    // marginal of adding an element of T / outside T at (a, b)
    let marg_in = |a: u64, b: u64| table[idx(a + 1, b)] - table[idx(a, b)];
    let marg_out = |a: u64, b: u64| table[idx(a, b + 1)] - table[idx(a, b)];

    let mut checks = Vec::new();

    // P1a
    {
        let mut checked = 0;
        let mut witness = None;
        'outer: for a in 0..=a_max {
            for b in 0..=b_max {
                for (case, ok) in [(AddedElement::InT, a < a_max), (AddedElement::OutsideT, b < b_max)] {
                    if !ok {
                        continue;
                    }
                    checked += 1;
                    let m = if case == AddedElement::InT { marg_in(a, b) } else { marg_out(a, b) };
                    if m < -SLACK {
                        witness = Some(Witness { a_a: a, b_a: b, a_b: None, b_b: None, added: Some(case), lhs: m, rhs: 0.0 });
                        break 'outer;
                    }
                }
            }
        }
        checks.push(PropertyCheck {
            property: Property::P1Monotone,
            passed: witness.is_none(),
            checked,
            witness,
            note: "unit marginals >= -1e-12".into(),
        });
    }

    // P1b: for A ⊑ B, f(u|A) >= γ f(u|B). For fixed B and u-case, the minimum
    // of f(u|A) over A ⊑ B is compared.
    {
        let mut checked = 0u64;
        let mut witness = None;
        'cases: for case in [AddedElement::InT, AddedElement::OutsideT] {
            let (a_lim, b_lim) = match case {
                AddedElement::InT => (a_max.checked_sub(1), Some(b_max)),
                AddedElement::OutsideT => (Some(a_max), b_max.checked_sub(1)),
            };
            let (Some(a_lim), Some(b_lim)) = (a_lim, b_lim) else { continue };
            let marg = |a, b| if case == AddedElement::InT { marg_in(a, b) } else { marg_out(a, b) };
            // prefix minimum over the dominated rectangle [0..=a] × [0..=b]
            let w = (b_lim + 1) as usize;
            let mut min_at = vec![(f64::INFINITY, 0u64, 0u64); (a_lim as usize + 1) * w];
            for a in 0..=a_lim {
                for b in 0..=b_lim {
                    let mut best = (marg(a, b), a, b);
                    if a > 0 {
                        let up = min_at[(a as usize - 1) * w + b as usize];
                        if up.0 < best.0 {
                            best = up;
                        }
                    }
                    if b > 0 {
                        let left = min_at[a as usize * w + b as usize - 1];
                        if left.0 < best.0 {
                            best = left;
                        }
                    }
                    min_at[a as usize * w + b as usize] = best;
                }
            }
            for a_b in 0..=a_lim {
                for b_b in 0..=b_lim {
                    checked += (a_b + 1) * (b_b + 1);
                    let (lo, a_a, b_a) = min_at[a_b as usize * w + b_b as usize];
                    let rhs = gamma * marg(a_b, b_b);
                    if lo < rhs - SLACK {
                        witness = Some(Witness { a_a, b_a, a_b: Some(a_b), b_b: Some(b_b), added: Some(case), lhs: lo, rhs });
                        break 'cases;
                    }
                }
            }
        }
        checks.push(PropertyCheck {
            property: Property::P1WeakDr,
            passed: witness.is_none(),
            checked,
            witness,
            note: format!("f(u|A) >= {gamma}*f(u|B) - 1e-12 for all comparable pairs"),
        });
    }

    // P2
    {
        let mut witness = None;
        let mut checked = 0;
        for a in 0..=a_max {
            for b in 0..=b_max {
                checked += 1;
                let v = table[idx(a, b)];
                if v > 1.0 + SLACK && witness.is_none() {
                    witness = Some(Witness { a_a: a, b_a: b, a_b: None, b_b: None, added: None, lhs: v, rhs: 1.0 });
                }
            }
        }
        let mut note = "f_T <= 1".to_string();
        if t_size == k && witness.is_none() {
            checked += 1;
            let v = table[idx(k, 0)];
            note.push_str("; f_T(T) = 1");
            if (v - 1.0).abs() > SLACK {
                witness = Some(Witness { a_a: k, b_a: 0, a_b: None, b_b: None, added: None, lhs: v, rhs: 1.0 });
            }
        }
        checks.push(PropertyCheck {
            property: Property::P2UpperBound,
            passed: witness.is_none(),
            checked,
            witness,
            note,
        });
    }

    // P3
    let eps = params.eps_prime_f64();
    let base = 1.0 - (-gamma).exp();
    let empty_max = (0..=k).map(empty_params_f).fold(f64::NEG_INFINITY, f64::max);
    let tight_p3 = empty_max <= base + 8.0 * eps + SLACK;
    {
        let bound = base + 12.0 * eps;
        let passed = empty_max <= bound + SLACK;
        checks.push(PropertyCheck {
            property: Property::P3EmptyMax,
            passed,
            checked: k + 1,
            witness: (!passed).then_some(Witness { a_a: 0, b_a: k, a_b: None, b_b: None, added: None, lhs: empty_max, rhs: bound }),
            note: format!(
                "max f_empty over |S|<=k = {empty_max:.12}; 12eps bound {}; 8eps bound {}",
                if passed { "held" } else { "failed" },
                if tight_p3 { "held" } else { "failed" }
            ),
        });
    }

    // P4
    {
        let mut witness = None;
        let mut checked = 0;
        'p4: for a in 0..=a_max {
            for b in 0..=b_max {
                if a + b + g >= 3 * k || a <= g {
                    checked += 1;
                    let v = table[idx(a, b)];
                    let e = empty_params_f(a + b);
                    if (v - e).abs() > SLACK {
                        witness = Some(Witness { a_a: a, b_a: b, a_b: None, b_b: None, added: None, lhs: v, rhs: e });
                        break 'p4;
                    }
                }
            }
        }
        checks.push(PropertyCheck {
            property: Property::P4SameAsEmpty,
            passed: witness.is_none(),
            checked,
            witness,
            note: format!("f_T(S) = f_empty(S) when |S| >= 3k-g or |S cap T| <= g (g = {g})"),
        });
    }

    Ok(CertificationReport {
        params: *params,
        t_size,
        checks,
        empty_max,
        tight_p3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base(gamma: f64) -> HardnessParams {
        HardnessParams::new(gamma, Ratio::new(1, 7), 7).unwrap()
    }

    #[test]
    fn derived_sizes() {
        let p = base(1.0);
        assert_eq!(p.ground_size(), 147);
        assert_eq!(p.g(), 2);
        assert!(HardnessParams::new(1.0, Ratio::new(1, 6), 6).is_err());
        assert!(HardnessParams::new(1.0, Ratio::new(1, 7), 6).is_err());
        assert!(HardnessParams::new(0.0, Ratio::new(1, 7), 7).is_err());
    }

    #[test]
    fn helper_values() {
        let p = base(1.0);
        assert_eq!(t_t(0, 0, &p), 0);
        assert_eq!(t_t(7, 0, &p), 2);
        assert_eq!(t_t(1, 5, &p), 6);
        assert_eq!((f1(0, 0, &p), f2(0, 0, &p), f3(0, 0, &p)), (1.0, 1.0, 1.0));
        for b in 0..=7 {
            assert_eq!(f2(0, b, &p), 1.0);
            assert_eq!(f3(0, b, &p), 1.0);
        }
        for b in 12..140 {
            assert_eq!(f2(0, b, &p), 0.0);
        }
        assert_eq!(f_t_counts(0, 0, &p), 0.0);
        assert_eq!(f_t_counts(7, 0, &p), 1.0);
        for a in 0..=7 {
            for b in (19 - a.min(19))..140 {
                if a + b >= 19 {
                    assert_eq!(f_t_counts(a, b, &p), 1.0);
                }
            }
        }
    }

    #[test]
    fn empty_max_closed_form() {
        let p = base(1.0);
        assert!((f_empty_max(&p, 7).unwrap() - (1.0 - 0.8f64.powi(7))).abs() < 1e-15);
        assert_eq!(f_empty_max(&p, 0).unwrap(), 0.0);
        assert!(f_empty_max(&p, 8).is_err());
    }

    #[test]
    fn certification_passes_on_valid_params() {
        for gamma in [1.0, 0.3] {
            let report = certify_properties(&base(gamma), 7).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn tampered_threshold_fails_p4() {
        let p = base(0.6);
        let claims = p.with_g(p.g() + 1);
        let report = certify_with(&claims, 7, |a, b| f_t_counts(a, b, &p)).unwrap();
        let p4 = report.check(Property::P4SameAsEmpty);
        assert!(!p4.passed);
        let w = p4.witness.unwrap();
        assert_eq!(w.a_a, 3);
    }

    #[test]
    fn report_csv_has_one_row_per_property() {
        let report = certify_properties(&base(0.6), 3).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("property,params,t_size,status,checked,a_A,b_A,a_B,b_B,u_case,lhs,rhs,note"));
        assert_eq!(text.lines().count(), 6);
    }

    proptest! {
        #[test]
        fn value_depends_only_on_counts(
            t_ids in proptest::collection::vec(0usize..147, 0..7),
            s_ids in proptest::collection::vec(0usize..147, 0..40),
        ) {
            let p = base(0.6);
            let t = IndexSet::from_ids(147, t_ids).unwrap();
            let s = IndexSet::from_ids(147, s_ids).unwrap();
            let a = s.intersection_size(&t) as u64;
            let b = s.len() as u64 - a;
            let oracle = HardnessOracle::new(p, t.clone()).unwrap();
            let v = oracle.value(&s).unwrap();
            prop_assert_eq!(v, f_t_counts(a, b, &p));
            // relabel: same counts through a canonical pair of sets
            let canon_t = IndexSet::from_ids(147, 0..t.len()).unwrap();
            let canon_s = IndexSet::from_ids(147, (0..a as usize).chain(t.len()..t.len() + b as usize)).unwrap();
            prop_assert_eq!(f_t_value(&canon_s, &canon_t, &p), v);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
