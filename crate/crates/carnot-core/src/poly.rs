//! Sparse multivariate polynomials with exact symbolic differentiation.
//!
//! Submanifolds are stored as polynomial level sets, so values, Jacobians,
//! and Hessians are all obtained by differentiating and evaluating these
//! polynomials — there is no finite-difference noise floor anywhere in the
//! blow-up pipeline. Terms live in a `BTreeMap` keyed by exponent vectors,
//! which keeps iteration order (and therefore all downstream floating-point
//! reductions) deterministic.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use alloc::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::math;

/// Exponent vector of one monomial; length always equals `nvars`.
type Monomial = Vec<u16>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The monomial `x_{index}` (0-based index).
    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut exps = vec![0u16; nvars];
        exps[index] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(exps, 1.0);
        p
    }

    /// Affine polynomial `c + sum coeffs[i] * x_i`.
    pub fn affine(nvars: usize, c: f64, coeffs: &[f64]) -> Self {
        assert_eq!(coeffs.len(), nvars);
        let mut p = Self::constant(nvars, c);
        for (i, a) in coeffs.iter().enumerate() {
            if *a != 0.0 {
                let mut exps = vec![0u16; nvars];
                exps[i] = 1;
                p.add_term(exps, *a);
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], f64)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), *c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(math::abs(*c)))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|e| *e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, exps: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn sub(&self, rhs: &Polynomial) -> Polynomial {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Polynomial::zero(self.nvars);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out
    }

    pub fn mul(&self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let exps: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn powu(&self, n: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Exact partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        assert!(i < self.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.clone();
            exps[i] = e - 1;
            out.add_term(exps, c * e as f64);
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    t *= math::powi(x[i], *e as u32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes `subs[i]` for variable `i`. All substituted polynomials
    /// must share a variable count, which becomes the result's.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial> {
        if subs.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: subs.len() });
        }
        let out_vars = if subs.is_empty() { 0 } else { subs[0].nvars };
        for s in subs {
            if s.nvars != out_vars {
                return Err(Error::DimensionMismatch { expected: out_vars, got: s.nvars });
            }
        }
        // Cache powers of each substituted polynomial up to its max exponent.
        let mut max_exp = vec![0u16; self.nvars];
        for m in self.terms.keys() {
            for (i, e) in m.iter().enumerate() {
                max_exp[i] = max_exp[i].max(*e);
            }
        }
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(self.nvars);
        for (i, s) in subs.iter().enumerate() {
            let mut ps = vec![Polynomial::constant(out_vars, 1.0)];
            for e in 1..=max_exp[i] {
                let prev = ps[(e - 1) as usize].clone();
                ps.push(prev.mul(s));
            }
            powers.push(ps);
        }
        let mut out = Polynomial::zero(out_vars);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(out_vars, *c);
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    t = t.mul(&powers[i][*e as usize]);
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Drops coefficients with magnitude at or below `tol`.
    pub fn cleanup(&self, tol: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            if math::abs(*c) > tol {
                out.terms.insert(m.clone(), *c);
            }
        }
        out
    }

    /// Range of weighted degrees over nonzero terms, or `None` when zero.
    pub fn weighted_degree_range(&self, weights: &[u32]) -> Option<(u32, u32)> {
        assert_eq!(weights.len(), self.nvars);
        let mut range: Option<(u32, u32)> = None;
        for m in self.terms.keys() {
            let d: u32 = m.iter().zip(weights).map(|(e, w)| *e as u32 * w).sum();
            range = Some(match range {
                None => (d, d),
                Some((lo, hi)) => (lo.min(d), hi.max(d)),
            });
        }
        range
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let factors: Vec<(u16, u16)> = m
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| **e > 0)
                        .map(|(i, e)| (i as u16, *e))
                        .collect();
                    (*c, factors)
                })
                .collect(),
        }
    }

    /// Parses an expression over variables `x1..x{nvars}` with `+ - * / ^`,
    /// parentheses, and numeric literals. `/` requires a constant divisor.
    pub fn parse(src: &str, nvars: usize) -> Result<Polynomial> {
        Parser::new(src, nvars).parse()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mag = math::abs(*c);
            if first {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if *c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = m.iter().all(|e| *e == 0);
            if mag != 1.0 || is_const {
                write!(f, "{}", mag)?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first_var = true;
            for (i, e) in m.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                write!(f, "x{}", i + 1)?;
                if *e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

/// Flat term list for fast repeated evaluation in sampling loops.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(u16, u16)>)>,
}

impl CompiledPoly {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for (var, exp) in factors {
                let v = x[*var as usize];
                let mut e = *exp;
                let mut base = v;
                let mut p = 1.0;
                while e > 0 {
                    if e & 1 == 1 {
                        p *= base;
                    }
                    base *= base;
                    e >>= 1;
                }
                t *= p;
            }
            acc += t;
        }
        acc
    }
}

struct Parser<'s> {
    src: &'s [u8],
    pos: usize,
    line: usize,
    col: usize,
    nvars: usize,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str, nvars: usize) -> Self {
        Parser { src: src.as_bytes(), pos: 0, line: 1, col: 1, nvars }
    }

    fn error(&self, msg: impl ToString) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump();
        }
    }

    fn parse(mut self) -> Result<Polynomial> {
        let p = self.expr()?;
        self.skip_ws();
        if let Some(c) = self.peek() {
            return Err(self.error(alloc::format!("unexpected character '{}'", c as char)));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(b'-') => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                Some(b'/') => {
                    self.bump();
                    let f = self.factor()?;
                    let c = match f.terms.iter().next() {
                        None => 0.0,
                        Some((m, c)) if f.terms.len() == 1 && m.iter().all(|e| *e == 0) => *c,
                        _ => {
                            return Err(self.error("divisor must be a numeric constant"));
                        }
                    };
                    if c == 0.0 {
                        return Err(self.error("division by zero"));
                    }
                    acc = acc.scale(1.0 / c);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        match self.peek() {
            Some(b'-') => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            Some(b'+') => {
                self.bump();
                self.factor()
            }
            _ => {
                let base = self.base()?;
                self.skip_ws();
                if self.peek() == Some(b'^') {
                    self.bump();
                    self.skip_ws();
                    let e = self.uint()?;
                    Ok(base.powu(e))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn base(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let p = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.bump();
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                Ok(Polynomial::constant(self.nvars, v))
            }
            Some(b'x') => {
                self.bump();
                let idx = self.uint()? as usize;
                if idx == 0 || idx > self.nvars {
                    return Err(self.error(alloc::format!(
                        "variable x{} out of range 1..{}",
                        idx, self.nvars
                    )));
                }
                Ok(Polynomial::variable(self.nvars, idx - 1))
            }
            Some(c) => Err(self.error(alloc::format!("unexpected character '{}'", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some(b'.') {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| self.error("malformed number"))
    }

    fn uint(&mut self) -> Result<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.error("expected an integer"));
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<u32>().map_err(|_| self.error("integer out of range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let p = Polynomial::parse("x3 - x1^2 - x2^2", 3).unwrap();
        assert_eq!(p.eval(&[1.0, 2.0, 5.0]), 0.0);
        assert_eq!(p.eval(&[1.0, 1.0, 0.0]), -2.0);
    }

    #[test]
    fn parse_rational_coefficients() {
        let p = Polynomial::parse("1/2*x1^2 + 3/4", 1).unwrap();
        assert_eq!(p.eval(&[2.0]), 2.75);
    }

    #[test]
    fn parse_rejects_unknown_variable() {
        let err = Polynomial::parse("x4 + 1", 3).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn parse_reports_position() {
        let err = Polynomial::parse("x1 +\n x2 $", 2).unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col >= 4);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_polynomial_divisor() {
        assert!(Polynomial::parse("x1 / x2", 2).is_err());
        assert!(Polynomial::parse("x1 / 0", 2).is_err());
    }

    #[test]
    fn derivative_of_product() {
        // d/dx1 (x1^3 x2) = 3 x1^2 x2
        let p = Polynomial::parse("x1^3 * x2", 2).unwrap();
        let d = p.partial(0);
        assert_eq!(d.eval(&[2.0, 5.0]), 60.0);
    }

    #[test]
    fn hessian_symmetry() {
        let p = Polynomial::parse("x1^2*x2 + x2^3 - x1*x2", 2).unwrap();
        let d01 = p.partial(0).partial(1);
        let d10 = p.partial(1).partial(0);
        assert_eq!(d01, d10);
    }

    #[test]
    fn compose_with_affine() {
        // p(x) = x1^2, substitute x1 = 1 + 2 y1 - y2
        let p = Polynomial::parse("x1^2", 1).unwrap();
        let sub = Polynomial::affine(2, 1.0, &[2.0, -1.0]);
        let q = p.compose(&[sub]).unwrap();
        assert_eq!(q.eval(&[1.0, 1.0]), 4.0);
        assert_eq!(q.total_degree(), 2);
    }

    #[test]
    fn weighted_degrees() {
        let p = Polynomial::parse("x1^2 + x2", 2).unwrap();
        assert_eq!(p.weighted_degree_range(&[1, 2]), Some((2, 2)));
        let q = Polynomial::parse("x1 + x2", 2).unwrap();
        assert_eq!(q.weighted_degree_range(&[1, 2]), Some((1, 2)));
    }

    #[test]
    fn compiled_matches_interpreted() {
        let p = Polynomial::parse("2*x1^3*x2 - x2^2 + 0.5*x3 - 7", 3).unwrap();
        let c = p.compile();
        let x = [1.3, -0.7, 2.9];
        assert!((p.eval(&x) - c.eval(&x)).abs() < 1e-14);
    }

    #[test]
    fn display_round_trips() {
        let p = Polynomial::parse("x1^2 - 2*x2 + 1", 2).unwrap();
        let text = alloc::format!("{}", p);
        let q = Polynomial::parse(&text, 2).unwrap();
        assert_eq!(p, q);
    }
}
