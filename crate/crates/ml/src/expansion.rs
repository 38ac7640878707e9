//! Explicit polynomial form of a homogeneous polynomial-kernel SVM.
//!
//! `sum_k c_k (gamma x_k . x)^d` expands by the multinomial theorem into
//! one coefficient per exponent tuple `e` with `|e| = d`:
//! `gamma^d * multinomial(d; e) * sum_k c_k prod_i x_{k,i}^{e_i}`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::svm::SvmModel;

/// Coefficients with smaller magnitude are dropped.
pub const COEFFICIENT_CUTOFF: f64 = 1e-12;
/// Largest supported degree for six variables.
pub const MAX_DEGREE: u32 = 18;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialExpansion {
    pub degree: u32,
    pub dim: usize,
    pub terms: Vec<Term>,
    pub bias: f64,
}

/// `C(n, k)` as `usize`, saturating.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(r).unwrap_or(usize::MAX)
}

/// Number of monomials of total degree `degree` in `dim` variables.
pub fn monomial_count(degree: u32, dim: usize) -> usize {
    binomial(degree as usize + dim - 1, dim - 1)
}

/// Upper bound on the term count: all monomials plus the bias.
pub fn max_terms(degree: u32, dim: usize) -> usize {
    monomial_count(degree, dim) + 1
}

/// Exponent tuples of total degree `degree` over `dim` variables, in
/// descending lexicographic order (`x0^d` first).
pub fn exponent_tuples(degree: u32, dim: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(left - e, pos + 1, cur, out);
        }
    }
    let mut out = Vec::with_capacity(monomial_count(degree, dim));
    if dim > 0 {
        rec(degree, 0, &mut vec![0; dim], &mut out);
    }
    out
}

fn multinomial(exponents: &[u32]) -> f64 {
    // Product of binomials keeps every intermediate an exact integer.
    let mut total = 0usize;
    let mut r = 1.0f64;
    for &e in exponents {
        total += e as usize;
        r *= binomial(total, e as usize) as f64;
    }
    r
}

/// Expand a homogeneous polynomial-kernel model, refusing degrees above
/// [`MAX_DEGREE`] for six-dimensional inputs.
pub fn svm_expand(m: &SvmModel) -> Result<PolynomialExpansion> {
    expand_with_limit(m, max_terms(MAX_DEGREE, 6))
}

/// Expand with an explicit cap on the number of coefficients computed.
pub fn expand_with_limit(m: &SvmModel, limit: usize) -> Result<PolynomialExpansion> {
    if m.coef0 != 0.0 {
        return Err(MlError::Config(
            "expansion needs a homogeneous kernel (coef0 = 0)".into(),
        ));
    }
    let dim = m.dim();
    if dim == 0 {
        return Ok(PolynomialExpansion {
            degree: m.degree,
            dim,
            terms: Vec::new(),
            bias: m.bias,
        });
    }
    let needed = monomial_count(m.degree, dim);
    if needed > limit {
        return Err(MlError::ExpansionTooLarge {
            degree: m.degree,
            terms: needed,
            limit,
        });
    }
    let d = m.degree as usize;
    // powers[k][i][e] = x_{k,i}^e
    let powers: Vec<Vec<Vec<f64>>> = m
        .support_vectors
        .iter()
        .map(|sv| {
            sv.iter()
                .map(|&v| {
                    std::iter::successors(Some(1.0f64), |p| Some(p * v))
                        .take(d + 1)
                        .collect()
                })
                .collect()
        })
        .collect();
    let weights: Vec<f64> = m
        .labels
        .iter()
        .zip(&m.alphas)
        .map(|(&y, &a)| y as f64 * a)
        .collect();
    let scale = m.gamma.powi(m.degree as i32);
    let mut terms = Vec::new();
    for exponents in exponent_tuples(m.degree, dim) {
        let mut sum = 0.0;
        for (pw, &w) in powers.iter().zip(&weights) {
            let mut p = w;
            for (i, &e) in exponents.iter().enumerate() {
                p *= pw[i][e as usize];
            }
            sum += p;
        }
        let coefficient = scale * multinomial(&exponents) * sum;
        if coefficient.abs() >= COEFFICIENT_CUTOFF {
            terms.push(Term {
                exponents,
                coefficient,
            });
        }
    }
    Ok(PolynomialExpansion {
        degree: m.degree,
        dim,
        terms,
        bias: m.bias,
    })
}

impl PolynomialExpansion {
    /// Kept monomials plus the bias.
    pub fn term_count(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(MlError::Dimension {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let mut total = self.bias;
        for t in &self.terms {
            let mut p = t.coefficient;
            for (&v, &e) in x.iter().zip(&t.exponents) {
                p *= v.powi(e as i32);
            }
            total += p;
        }
        Ok(total)
    }

    /// CSV with one row per term: exponents `e0..`, then `coefficient`.
    /// The bias is the all-zero exponent row at the end.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.dim).map(|i| format!("e{i}")).collect();
        header.push("coefficient".into());
        wr.write_record(&header)?;
        let zero = vec![0u32; self.dim];
        for (exps, c) in self
            .terms
            .iter()
            .map(|t| (&t.exponents, t.coefficient))
            .chain(std::iter::once((&zero, self.bias)))
        {
            let mut rec: Vec<String> = exps.iter().map(u32::to_string).collect();
            rec.push(format!("{c:e}"));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let dim = rd.headers()?.len().saturating_sub(1);
        let mut terms = Vec::new();
        let mut bias = 0.0;
        let mut degree = 0;
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let parse_err =
                |reason: String| MlError::Config(format!("line {}: {reason}", line + 2));
            let exponents = (0..dim)
                .map(|i| rec[i].parse::<u32>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<u32>>>()?;
            let coefficient: f64 = rec[dim]
                .parse()
                .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
            if exponents.iter().all(|&e| e == 0) {
                bias = coefficient;
            } else {
                degree = exponents.iter().sum();
                terms.push(Term {
                    exponents,
                    coefficient,
                });
            }
        }
        Ok(Self {
            degree,
            dim,
            terms,
            bias,
        })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::ClassWeights;

    fn model(degree: u32) -> SvmModel {
        SvmModel {
            support_vectors: vec![
                vec![1.0, -2.0, 0.0],
                vec![0.5, 1.0, 2.0],
                vec![-1.0, 0.0, 1.0],
            ],
            labels: vec![1, -1, 1],
            alphas: vec![0.7, 1.2, 0.3],
            bias: -0.25,
            degree,
            gamma: 0.4,
            coef0: 0.0,
            c: 1.0,
            weights: ClassWeights::default(),
        }
    }

    #[test]
    fn counts() {
        assert_eq!(binomial(23, 5), 33649);
        assert_eq!(max_terms(2, 6), 22);
        assert_eq!(max_terms(18, 6), 33650);
        assert_eq!(exponent_tuples(4, 3).len(), monomial_count(4, 3));
        assert_eq!(
            exponent_tuples(2, 2),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(multinomial(&[2, 1, 1]), 12.0);
    }

    #[test]
    fn matches_kernel_form() {
        for degree in 1..=6 {
            let m = model(degree);
            let e = svm_expand(&m).unwrap();
            assert!(e.term_count() <= max_terms(degree, 3));
            for x in [[0.3, -1.1, 2.0], [1.0, 1.0, 1.0], [-2.0, 0.5, 0.0]] {
                let a = m.decision(&x).unwrap();
                let b = e.evaluate(&x).unwrap();
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "degree {degree}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn guards() {
        let mut m = model(2);
        m.coef0 = 1.0;
        assert!(svm_expand(&m).is_err());
        let m = SvmModel {
            support_vectors: vec![vec![1.0; 6]],
            labels: vec![1],
            alphas: vec![1.0],
            degree: 19,
            ..model(2)
        };
        assert!(matches!(
            svm_expand(&m),
            Err(MlError::ExpansionTooLarge { degree: 19, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let e = svm_expand(&model(3)).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let back = PolynomialExpansion::read_csv(&buf[..]).unwrap();
        assert_eq!(back.term_count(), e.term_count());
        assert_eq!(back.bias, e.bias);
        let x = [0.5, 0.25, -1.0];
        assert!((back.evaluate(&x).unwrap() - e.evaluate(&x).unwrap()).abs() < 1e-12);
    }
}
