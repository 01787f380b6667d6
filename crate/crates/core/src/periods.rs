//! Cycle integrals of one-forms and the table of second-kind periods.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{build_cycle, Cycle, CycleKind};
use crate::error::{Error, Result};
use crate::forms::{
    basic_relations, multiply_reduce, reduce_to_second_kind, MonomialForm, OneForm, SecondKindForm,
    HAT_INDICES,
};
use crate::integrals::IntegralQuartet;
use crate::theta::ThetaParam;

type C64 = Complex64;

/// Anything with a density `f(z, w)` such that the form is `f dz`.
pub trait Density {
    fn density_at(&self, z: C64, w: C64) -> C64;
}

impl Density for OneForm {
    fn density_at(&self, z: C64, w: C64) -> C64 {
        self.density(z, w)
    }
}

impl Density for SecondKindForm {
    fn density_at(&self, z: C64, w: C64) -> C64 {
        self.density(z, w)
    }
}

impl Density for MonomialForm {
    fn density_at(&self, z: C64, w: C64) -> C64 {
        self.density(z, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodValue {
    pub value: C64,
    pub err: f64,
}

/// `∫_c ω`, failing if the panel-doubling error estimate exceeds `tol`.
pub fn period<D: Density>(form: &D, cycle: &Cycle, tol: f64) -> Result<PeriodValue> {
    let ([value], err) = cycle.integrate(|z, w| [form.density_at(z, w)])?;
    if !(err <= tol) {
        return Err(Error::QuadratureNonConvergence { value: value.norm(), achieved: err, tol });
    }
    Ok(PeriodValue { value, err })
}

/// The four cycles at one θ, built once.
#[derive(Debug, Clone)]
pub struct CycleSet {
    pub theta: ThetaParam,
    pub cycles: [Cycle; 4],
}

impl CycleSet {
    pub fn new(theta: &ThetaParam) -> Result<Self> {
        let [a, b, c, d] = CycleKind::ALL;
        Ok(CycleSet {
            theta: *theta,
            cycles: [
                build_cycle(theta, a)?,
                build_cycle(theta, b)?,
                build_cycle(theta, c)?,
                build_cycle(theta, d)?,
            ],
        })
    }

    /// Several densities integrated simultaneously over each cycle.
    pub fn periods<F, const N: usize>(&self, density: F) -> Result<[[C64; N]; 4]>
    where
        F: Fn(C64, C64) -> [C64; N] + Copy,
    {
        let mut out = [[C64::new(0.0, 0.0); N]; 4];
        for (o, c) in out.iter_mut().zip(&self.cycles) {
            *o = c.integrate(density)?.0;
        }
        Ok(out)
    }
}

pub const TABLE_FORMS: [&str; 4] = ["dz/w", "z dz/w", "z^3 dz/w^3", "z^4 dz/w^3"];

/// Closed-form periods: `[cycle][form]` in [`CycleKind::ALL`] and
/// [`TABLE_FORMS`] order.
pub fn closed_form_periods(q: &IntegralQuartet) -> [[C64; 4]; 4] {
    let i = C64::i();
    let e = C64::from_polar(1.0, FRAC_PI_4);
    let ec = e.conj();
    let (a, b, c, d) = (q.a, q.b, q.c, q.d);
    [
        [C64::from(2.0 * a), C64::from(2.0 * a), C64::from(2.0 * c), C64::from(2.0 * c)],
        [2.0 * a * i, -2.0 * a * i, 2.0 * c * i, -2.0 * c * i],
        [2.0 * b * e, -2.0 * b * ec, -2.0 * d * e, 2.0 * d * ec],
        [-2.0 * b * ec, 2.0 * b * e, 2.0 * d * ec, -2.0 * d * e],
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEntry {
    pub form: String,
    pub cycle: String,
    pub value: C64,
    pub closed_form: C64,
    pub abs_err: f64,
    pub quad_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTable {
    pub theta: f64,
    pub entries: Vec<PeriodEntry>,
}

impl PeriodTable {
    pub fn max_abs_err(&self) -> f64 {
        self.entries.iter().map(|e| e.abs_err).fold(0.0, f64::max)
    }
}

/// Numerical periods of the four second-kind forms against their closed forms.
pub fn period_table(q: &IntegralQuartet) -> Result<PeriodTable> {
    let theta = q.theta;
    let exact = closed_form_periods(q);
    let mut entries = Vec::with_capacity(16);
    for (ci, kind) in CycleKind::ALL.iter().enumerate() {
        let cyc = build_cycle(&theta, *kind)?;
        let (vals, err) = cyc.integrate(|z, w| {
            let w1 = w.inv();
            let w3 = w1 * w1 * w1;
            let z3 = z * z * z;
            [w1, z * w1, z3 * w3, z3 * z * w3]
        })?;
        for (fi, name) in TABLE_FORMS.iter().enumerate() {
            entries.push(PeriodEntry {
                form: (*name).to_string(),
                cycle: kind.name().to_string(),
                value: vals[fi],
                closed_form: exact[ci][fi],
                abs_err: (vals[fi] - exact[ci][fi]).norm(),
                quad_err: err,
            });
        }
    }
    Ok(PeriodTable { theta: q.theta.theta(), entries })
}

/// Largest period of an exact combination `lhs − rhs` over the four cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationPeriod {
    pub relation: String,
    pub periods: [C64; 4],
    pub max_abs: f64,
    pub quad_err: f64,
}

/// The difference forms whose periods must vanish: the basic equivalences,
/// and for every residue-free basis form `ω` the three reductions of `ω`,
/// `zω` and `z²ω` to the second-kind basis.
pub fn exact_combinations(theta: ThetaParam) -> Result<Vec<(String, MonomialForm)>> {
    let mut out: Vec<(String, MonomialForm)> =
        basic_relations(theta).into_iter().map(|(l, f)| (l.to_string(), f)).collect();
    let names = ["dz/w", "dz/w^3", "z dz/w^3", "z^2 dz/w^3", "z^3 dz/w^3", "z^4 dz/w^3"];
    for (name, &i) in names.iter().zip(&HAT_INDICES) {
        let w = OneForm::basis(theta, i);
        let m = w.to_monomials();
        out.push((format!("reduce {name}"), m.clone().minus(&reduce_to_second_kind(&w)?.to_monomials())));
        out.push((format!("z * {name}"), m.times_z(1).minus(&multiply_reduce(&w, 1)?.to_monomials())));
        out.push((format!("z^2 * {name}"), m.times_z(2).minus(&multiply_reduce(&w, 2)?.to_monomials())));
    }
    Ok(out)
}

pub fn relation_periods(theta: &ThetaParam) -> Result<Vec<RelationPeriod>> {
    let cycles = CycleSet::new(theta)?;
    exact_combinations(*theta)?
        .into_iter()
        .map(|(relation, form)| {
            let mut periods = [C64::new(0.0, 0.0); 4];
            let mut quad_err: f64 = 0.0;
            for (p, c) in periods.iter_mut().zip(&cycles.cycles) {
                let ([v], e) = c.integrate(|z, w| [form.density(z, w)])?;
                *p = v;
                quad_err = quad_err.max(e);
            }
            let max_abs = periods.iter().map(|p| p.norm()).fold(0.0, f64::max);
            Ok(RelationPeriod { relation, periods, max_abs, quad_err })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::integral_quartet;

    #[test]
    fn table_matches_closed_forms() {
        for th in [0.3, 1.1] {
            let q = integral_quartet(&ThetaParam::new(th).unwrap(), 1e-12).unwrap();
            let t = period_table(&q).unwrap();
            for e in &t.entries {
                assert!(e.abs_err < 1e-8, "{} over {}: {} vs {}", e.form, e.cycle, e.value, e.closed_form);
            }
        }
    }

    #[test]
    fn exact_combinations_have_no_periods() {
        let t = ThetaParam::new(0.7).unwrap();
        let r = relation_periods(&t).unwrap();
        assert_eq!(r.len(), 24);
        for e in &r {
            assert!(e.max_abs < 1e-8, "{}: {}", e.relation, e.max_abs);
        }
    }

    #[test]
    fn period_respects_tolerance() {
        let t = ThetaParam::new(0.5).unwrap();
        let c = build_cycle(&t, CycleKind::C4Loop).unwrap();
        let f = OneForm::basis(t, 0);
        assert!(period(&f, &c, 1e-10).is_ok());
        assert!(matches!(period(&f, &c, 0.0), Err(Error::QuadratureNonConvergence { .. })));
    }
}
