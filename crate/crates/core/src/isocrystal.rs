//! Isocrystals over finite fields and their Newton slopes.
//!
//! An isocrystal over F_q, q = p^a, is a finite free module over Q_{p^a} with
//! an injective σ-semilinear Frobenius φ, stored here as the matrix A of φ in
//! a fixed basis. Slopes are computed by the one normalization that makes
//! "slopes over F_q" unambiguous: linearize F = φ^a = A·σ(A)⋯σ^{a−1}(A) (a
//! genuinely linear map), take the characteristic polynomial of F, read the
//! valuations of its eigenvalues off the lower convex hull of the coefficient
//! valuations, and divide by a. This never extracts eigenvalues, needs no
//! field extension, and is independent of the basis and of further base
//! extension. If a hull vertex cannot be pinned down at the tracked precision
//! the computation fails loudly instead of guessing.
//!
//! Rank-h models of a single slope λ = d/h (in lowest terms):
//! [`Isocrystal::simple`] realizes the relation φ^h = p^d (slopes {λ, …, λ}),
//! and [`Isocrystal::b_lambda`] realizes φ(e_i) = p^{−d·⌊i/h⌋} e_{i+1} with
//! e_{h+1} = e_1 (slopes {−λ, …, −λ}). The generic-polygon convention carries
//! a minus sign, so the latter's generic polygon is constantly λ; third-party
//! sources that renormalize differently should be compared against these two
//! models rather than silently adjusted.

use crate::np::SlopeMultiset;
use crate::padic::{PadicNumber, UnramifiedContext, UnramifiedElement, Valuation, DEFAULT_PRECISION};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::de::Error as _;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsocrystalError {
    #[error("SingularFrobenius: the Frobenius matrix has determinant zero")]
    SingularFrobenius,
    #[error("PrecisionExhausted: {0}")]
    PrecisionExhausted(String),
    #[error("NotLowestTerms: {0}/{1} is not in lowest terms (or h ≤ 0)")]
    NotLowestTerms(i64, i64),
    #[error("BadInput: {0}")]
    BadInput(String),
}

impl IsocrystalError {
    pub fn variant(&self) -> &'static str {
        match self {
            IsocrystalError::SingularFrobenius => "SingularFrobenius",
            IsocrystalError::PrecisionExhausted(_) => "PrecisionExhausted",
            IsocrystalError::NotLowestTerms(..) => "NotLowestTerms",
            IsocrystalError::BadInput(_) => "BadInput",
        }
    }
}

/// Checks λ = d/h is in lowest terms with h > 0 (and d = 0 forces h = 1).
pub fn check_lowest_terms(d: i64, h: i64) -> Result<(), IsocrystalError> {
    if h <= 0 || d.gcd(&h) != 1 || (d == 0 && h != 1) {
        return Err(IsocrystalError::NotLowestTerms(d, h));
    }
    Ok(())
}

pub type Matrix = Vec<Vec<UnramifiedElement>>;

/// σ-semilinear Frobenius matrix over the degree-a unramified extension.
#[derive(Debug, Clone)]
pub struct Isocrystal {
    ctx: Arc<UnramifiedContext>,
    rank: usize,
    matrix: Matrix,
}

impl Isocrystal {
    pub fn new(ctx: Arc<UnramifiedContext>, matrix: Matrix) -> Result<Self, IsocrystalError> {
        let rank = matrix.len();
        if rank == 0 || matrix.iter().any(|row| row.len() != rank) {
            return Err(IsocrystalError::BadInput(
                "Frobenius matrix must be square and nonempty".into(),
            ));
        }
        for row in &matrix {
            for e in row {
                if !e.ctx().compatible(&ctx) {
                    return Err(IsocrystalError::BadInput(
                        "matrix entry from a different extension".into(),
                    ));
                }
            }
        }
        Ok(Isocrystal { ctx, rank, matrix })
    }

    /// Builds an isocrystal over F_{p^a} from scalar (prime-field) entries.
    pub fn from_scalar_matrix(
        p: u64,
        a: u32,
        prec: u32,
        entries: &[Vec<PadicNumber>],
    ) -> Result<Self, IsocrystalError> {
        let ctx = UnramifiedContext::new(p, a, prec);
        let matrix = entries
            .iter()
            .map(|row| row.iter().map(|s| ctx.from_scalar(s.clone())).collect())
            .collect();
        Isocrystal::new(ctx, matrix)
    }

    /// diag(p^{e_1}, …, p^{e_n}) over F_{p^a}.
    pub fn diagonal_powers(p: u64, a: u32, prec: u32, exps: &[i64]) -> Self {
        let ctx = UnramifiedContext::new(p, a, prec);
        let n = exps.len();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            ctx.p_power(exps[i])
                        } else {
                            ctx.zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Isocrystal::new(ctx, matrix).expect("diagonal matrix is square")
    }

    /// The simple isocrystal of slope λ = d/h: rank h over F_p, φ acting as
    /// the companion of φ^h = p^d. Its slopes are {λ} with multiplicity h.
    pub fn simple(p: u64, d: i64, h: i64, prec: u32) -> Result<Self, IsocrystalError> {
        check_lowest_terms(d, h)?;
        let h = h as usize;
        let ctx = UnramifiedContext::new(p, 1, prec);
        let mut matrix: Matrix = (0..h).map(|_| (0..h).map(|_| ctx.zero()).collect()).collect();
        for i in 0..h - 1 {
            matrix[i + 1][i] = ctx.one(); // e_{i+1} ↦ e_{i+2}
        }
        matrix[0][h - 1] = ctx.p_power(d); // e_h ↦ p^d e_1
        Isocrystal::new(ctx, matrix)
    }

    /// The rank-h module with φ(e_i) = p^{−d·⌊i/h⌋} e_{i+1}, e_{h+1} = e_1:
    /// only the step e_h ↦ e_1 picks up p^{−d}. Its slopes are {−λ}×h, so the
    /// generic polygon (which negates) is constantly λ.
    pub fn b_lambda(p: u64, d: i64, h: i64, prec: u32) -> Result<Self, IsocrystalError> {
        check_lowest_terms(d, h)?;
        let h = h as usize;
        let ctx = UnramifiedContext::new(p, 1, prec);
        let mut matrix: Matrix = (0..h).map(|_| (0..h).map(|_| ctx.zero()).collect()).collect();
        for i in 0..h - 1 {
            matrix[i + 1][i] = ctx.one();
        }
        matrix[0][h - 1] = ctx.p_power(-d);
        Isocrystal::new(ctx, matrix)
    }

    pub fn ctx(&self) -> &Arc<UnramifiedContext> {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    /// The exponent a of the base field F_{p^a}.
    pub fn base_degree(&self) -> u32 {
        self.ctx.degree()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Whether the Frobenius matrix is diagonal to working precision.
    pub fn is_diagonal(&self) -> bool {
        self.matrix.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| i == j || e.is_zero_to_prec())
        })
    }

    /// Exact valuations of the diagonal entries (for diagonal φ).
    pub fn diagonal_valuations(&self) -> Result<Vec<i64>, IsocrystalError> {
        (0..self.rank)
            .map(|i| match self.matrix[i][i].valuation() {
                Valuation::Exact(v) => Ok(v),
                Valuation::Infinite => Err(IsocrystalError::SingularFrobenius),
                Valuation::AtLeast(_) => Err(IsocrystalError::PrecisionExhausted(
                    format!("diagonal entry {i} has no known digit"),
                )),
            })
            .collect()
    }

    /// The linearization F = A·σ(A)·⋯·σ^{a−1}(A) of φ^a.
    pub fn linearized_frobenius(&self) -> Matrix {
        let mut acc = self.matrix.clone();
        let mut twisted = self.matrix.clone();
        for _ in 1..self.base_degree() {
            twisted = map_frobenius(&twisted);
            acc = mat_mul(&self.ctx, &acc, &twisted);
        }
        acc
    }

    /// Newton slopes over F_q: eigenvalue valuations of φ^a, divided by a, as
    /// a sorted multiset. Exact; fails on singular φ or ambiguous precision.
    pub fn newton_slopes(&self) -> Result<SlopeMultiset, IsocrystalError> {
        let lin = self.linearized_frobenius();
        let charpoly = berkowitz_char_poly(&self.ctx, &lin);
        let valuations = hull_input(&charpoly)?;
        let hull_slopes = newton_hull(&valuations, self.rank)?;
        let a = BigInt::from(self.base_degree());
        let mut slopes = Vec::with_capacity(self.rank);
        for (slope, width) in hull_slopes {
            // eigenvalue valuation is the negated hull slope, normalized by a
            let lam = -slope / Rat::from_integer(a.clone());
            for _ in 0..width {
                slopes.push(lam.clone());
            }
        }
        Ok(SlopeMultiset::new(slopes))
    }

    /// Classification data: isotypic labels (λ_i, m_i), each λ_i = d_i/h_i in
    /// lowest terms with m_i·h_i the multiplicity of λ_i, so Σ m_i·h_i = rank.
    /// This is data only; no change of basis is performed.
    pub fn dm_class(&self) -> Result<Vec<(Rat, usize)>, IsocrystalError> {
        let slopes = self.newton_slopes()?;
        let mut out: Vec<(Rat, usize)> = Vec::new();
        for s in slopes.slopes() {
            match out.last_mut() {
                Some((prev, count)) if prev == s => *count += 1,
                _ => out.push((s.clone(), 1)),
            }
        }
        Ok(out
            .into_iter()
            .map(|(lam, count)| {
                let h = usize::try_from(lam.denom().abs()).expect("small denominator");
                debug_assert_eq!(count % h, 0, "isotypic multiplicity divisible by denominator");
                (lam, count / h)
            })
            .collect())
    }
}

/// Heuristic working precision for slope computations: a·n·(1 + max |entry
/// valuation|) + 8 digits, and at least the crate default.
pub fn recommended_precision(a: u32, rank: usize, max_abs_entry_val: i64) -> u32 {
    let base = (a as i64) * (rank as i64) * (1 + max_abs_entry_val.abs()) + 8;
    (base.max(8) as u32).max(DEFAULT_PRECISION)
}

pub(crate) fn map_frobenius(m: &Matrix) -> Matrix {
    m.iter()
        .map(|row| row.iter().map(|e| e.frobenius()).collect())
        .collect()
}

pub(crate) fn mat_mul(ctx: &Arc<UnramifiedContext>, a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = ctx.zero();
                    for (l, b_row) in b.iter().enumerate().take(k) {
                        acc = acc.add(&a[i][l].mul(&b_row[j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub(crate) fn mat_identity(ctx: &Arc<UnramifiedContext>, n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ctx.one() } else { ctx.zero() })
                .collect()
        })
        .collect()
}

pub(crate) fn mat_is_zero(m: &Matrix) -> bool {
    m.iter().all(|row| row.iter().all(|e| e.is_zero_to_prec()))
}

/// Characteristic polynomial of det(tI − M) by the Samuelson–Berkowitz
/// scheme: division-free, so precision only flows through ring operations.
/// Returns coefficients `c[0..=n]` with `c[n] = 1` (coefficient of t^i at i).
pub fn berkowitz_char_poly(ctx: &Arc<UnramifiedContext>, m: &Matrix) -> Vec<UnramifiedElement> {
    let n = m.len();
    // poly for the trailing 0×0 block, in descending-coefficient layout
    let mut poly: Vec<UnramifiedElement> = vec![ctx.one()];
    for k in (0..n).rev() {
        // split over index k: a = m[k][k], R = row right of a, C = column
        // below a, M = the block below-right
        let a = &m[k][k];
        let size = n - k;
        // first column of the Toeplitz operator: 1, −a, −R·C, −R·M·C, …
        let mut col: Vec<UnramifiedElement> = Vec::with_capacity(size + 1);
        col.push(ctx.one());
        col.push(a.neg());
        if size >= 2 {
            let mut w: Vec<UnramifiedElement> = (k + 1..n).map(|i| m[i][k].clone()).collect();
            for _ in 0..size - 1 {
                let mut dot = ctx.zero();
                for (idx, j) in (k + 1..n).enumerate() {
                    dot = dot.add(&m[k][j].mul(&w[idx]));
                }
                col.push(dot.neg());
                let next: Vec<UnramifiedElement> = (k + 1..n)
                    .map(|i| {
                        let mut acc = ctx.zero();
                        for (idx, j) in (k + 1..n).enumerate() {
                            acc = acc.add(&m[i][j].mul(&w[idx]));
                        }
                        acc
                    })
                    .collect();
                w = next;
            }
        }
        // poly ← Toeplitz(col) · poly: the convolution truncated to the new
        // coefficient count
        let mut next: Vec<UnramifiedElement> = vec![ctx.zero(); poly.len() + 1];
        for (j, pj) in poly.iter().enumerate() {
            for (i, ci) in col.iter().enumerate() {
                if i + j > poly.len() {
                    break;
                }
                next[i + j] = next[i + j].add(&ci.mul(pj));
            }
        }
        poly = next;
    }
    // descending order poly[0]·t^n + ⋯ + poly[n]; flip to ascending
    poly.reverse();
    poly
}

/// Valuation data for the hull. The constant coefficient (the determinant up
/// to sign) must be exactly valued for the polygon to have a left anchor.
fn hull_input(coeffs: &[UnramifiedElement]) -> Result<Vec<Valuation>, IsocrystalError> {
    let vals: Vec<Valuation> = coeffs.iter().map(|c| c.valuation()).collect();
    match vals[0] {
        Valuation::Infinite => Err(IsocrystalError::SingularFrobenius),
        Valuation::AtLeast(_) => Err(IsocrystalError::PrecisionExhausted(
            "determinant is indistinguishable from zero at tracked precision".into(),
        )),
        Valuation::Exact(_) => Ok(vals),
    }
}

/// Lower convex hull of the points (i, val c_i); returns (slope, width) per
/// segment, slopes strictly increasing. Points known only as lower bounds
/// must lie on or above the hull, otherwise the hull is ambiguous.
fn newton_hull(vals: &[Valuation], degree: usize) -> Result<Vec<(Rat, usize)>, IsocrystalError> {
    let mut exact: Vec<(i64, i64)> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        if let Valuation::Exact(val) = v {
            exact.push((i as i64, *val));
        }
    }
    debug_assert!(exact.first().is_some_and(|&(i, _)| i == 0));
    debug_assert!(exact.last().is_some_and(|&(i, _)| i == degree as i64));
    // monotone chain over ascending abscissae
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &(x, y) in &exact {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross =
                (x2 - x1) as i128 * (y - y1) as i128 - (y2 - y1) as i128 * (x - x1) as i128;
            // keep (x2,y2) only if it lies strictly below the chord
            if cross < 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let hull_value_num = |x: i64| -> Option<(i128, i128)> {
        // hull value at x as a fraction (num, den), den > 0
        for w in hull.windows(2) {
            let (x1, y1) = w[0];
            let (x2, y2) = w[1];
            if x >= x1 && x <= x2 {
                let den = (x2 - x1) as i128;
                let num = y1 as i128 * den + (y2 - y1) as i128 * (x - x1) as i128;
                return Some((num, den));
            }
        }
        None
    };
    for (i, v) in vals.iter().enumerate() {
        if let Valuation::AtLeast(bound) = v {
            if let Some((num, den)) = hull_value_num(i as i64) {
                if (*bound as i128) * den < num {
                    return Err(IsocrystalError::PrecisionExhausted(format!(
                        "coefficient {i} is indistinguishable from zero and its bound \
                         falls below the hull"
                    )));
                }
            }
        }
    }
    Ok(hull
        .windows(2)
        .map(|w| {
            let (x1, y1) = w[0];
            let (x2, y2) = w[1];
            let slope = Rat::new(BigInt::from(y2 - y1), BigInt::from(x2 - x1));
            (slope, (x2 - x1) as usize)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// (φ, N)-modules
// ---------------------------------------------------------------------------

/// An isocrystal together with a linear monodromy matrix N.
#[derive(Debug, Clone)]
pub struct PhiNModule {
    pub isocrystal: Isocrystal,
    pub n_matrix: Matrix,
}

impl PhiNModule {
    pub fn new(isocrystal: Isocrystal, n_matrix: Matrix) -> Result<Self, IsocrystalError> {
        if n_matrix.len() != isocrystal.rank()
            || n_matrix.iter().any(|r| r.len() != isocrystal.rank())
        {
            return Err(IsocrystalError::BadInput(
                "monodromy matrix must match the rank".into(),
            ));
        }
        Ok(PhiNModule {
            isocrystal,
            n_matrix,
        })
    }

    /// True iff N is nilpotent and N·A = p·A·σ(N) holds to precision (the
    /// matrix form of Nφ = pφN for σ-semilinear φ).
    pub fn validate(&self) -> bool {
        let ctx = self.isocrystal.ctx();
        let n = self.isocrystal.rank();
        // nilpotency: N^n = 0 to precision
        let mut power = self.n_matrix.clone();
        for _ in 1..n {
            power = mat_mul(ctx, &power, &self.n_matrix);
        }
        if !mat_is_zero(&power) {
            return false;
        }
        let lhs = mat_mul(ctx, &self.n_matrix, self.isocrystal.matrix());
        let sigma_n = map_frobenius(&self.n_matrix);
        let mut rhs = mat_mul(ctx, self.isocrystal.matrix(), &sigma_n);
        let p_scalar = PadicNumber::p_power(ctx.p(), 1);
        for row in rhs.iter_mut() {
            for e in row.iter_mut() {
                *e = e.mul_scalar(&p_scalar);
            }
        }
        lhs.iter()
            .zip(&rhs)
            .all(|(lr, rr)| lr.iter().zip(rr).all(|(a, b)| a.eq_to_prec(b)))
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct IsocrystalJson {
    p: u64,
    a: u32,
    rank: usize,
    #[serde(default)]
    prec: Option<u32>,
    matrix: Vec<Vec<EntryJson>>,
}

/// A matrix entry: either a bare scalar or an array of a scalar coefficients.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Scalar(PadicNumber),
    Coeffs(Vec<PadicNumber>),
}

impl Serialize for Isocrystal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let a = self.base_degree();
        let matrix = self
            .matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        if a == 1 {
                            EntryJson::Scalar(e.coeffs()[0].clone())
                        } else {
                            EntryJson::Coeffs(e.coeffs().to_vec())
                        }
                    })
                    .collect()
            })
            .collect();
        IsocrystalJson {
            p: self.p(),
            a,
            rank: self.rank,
            prec: Some(self.ctx.precision()),
            matrix,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Isocrystal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = IsocrystalJson::deserialize(d)?;
        let prec = json.prec.unwrap_or(DEFAULT_PRECISION);
        let ctx = UnramifiedContext::new(json.p, json.a, prec);
        if json.matrix.len() != json.rank {
            return Err(D::Error::custom("matrix size does not match rank"));
        }
        let matrix = json
            .matrix
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| match e {
                        EntryJson::Scalar(s) => {
                            if s.p() != json.p {
                                return Err(D::Error::custom("entry prime mismatch"));
                            }
                            Ok(ctx.from_scalar(s))
                        }
                        EntryJson::Coeffs(c) => {
                            if c.len() != json.a as usize {
                                return Err(D::Error::custom(
                                    "entry coefficient count must equal a",
                                ));
                            }
                            if c.iter().any(|s| s.p() != json.p) {
                                return Err(D::Error::custom("entry prime mismatch"));
                            }
                            Ok(ctx.elem(c))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Isocrystal::new(ctx, matrix).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn slopes_of(iso: &Isocrystal) -> Vec<Rat> {
        iso.newton_slopes().unwrap().slopes().to_vec()
    }

    /// Independent oracle: characteristic polynomial by cofactor expansion,
    /// for small ranks only.
    fn charpoly_cofactor(ctx: &Arc<UnramifiedContext>, m: &Matrix) -> Vec<UnramifiedElement> {
        type Poly = Vec<UnramifiedElement>;
        fn padd(ctx: &Arc<UnramifiedContext>, a: &Poly, b: &Poly) -> Poly {
            let n = a.len().max(b.len());
            (0..n)
                .map(|i| {
                    let x = a.get(i).cloned().unwrap_or_else(|| ctx.zero());
                    let y = b.get(i).cloned().unwrap_or_else(|| ctx.zero());
                    x.add(&y)
                })
                .collect()
        }
        fn pmul(ctx: &Arc<UnramifiedContext>, a: &Poly, b: &Poly) -> Poly {
            let mut out = vec![ctx.zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] = out[i + j].add(&x.mul(y));
                }
            }
            out
        }
        fn det(ctx: &Arc<UnramifiedContext>, m: &[Vec<Poly>]) -> Poly {
            let n = m.len();
            if n == 1 {
                return m[0][0].clone();
            }
            let mut acc = vec![ctx.zero()];
            for j in 0..n {
                let minor: Vec<Vec<Poly>> = (1..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| m[i][c].clone())
                            .collect()
                    })
                    .collect();
                let mut term = pmul(ctx, &m[0][j], &det(ctx, &minor));
                if j % 2 == 1 {
                    term = term.iter().map(|c| c.neg()).collect();
                }
                acc = padd(ctx, &acc, &term);
            }
            acc
        }
        let n = m.len();
        let entries: Vec<Vec<Poly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            vec![m[i][j].neg(), ctx.one()]
                        } else {
                            vec![m[i][j].neg()]
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = det(ctx, &entries);
        out.resize(n + 1, ctx.zero());
        out
    }

    #[test]
    fn diagonal_slopes() {
        let iso = Isocrystal::diagonal_powers(5, 1, 16, &[0, 1]);
        assert_eq!(slopes_of(&iso), vec![rat(0, 1), rat(1, 1)]);
    }

    #[test]
    fn companion_half_slopes() {
        // companion of t² − p: slopes {1/2, 1/2}
        let iso = Isocrystal::simple(5, 1, 2, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn simple_isocrystal_examples() {
        let iso = Isocrystal::simple(7, 0, 1, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(0, 1)]);
        let iso = Isocrystal::simple(7, -1, 1, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(-1, 1)]);
        let iso = Isocrystal::simple(7, 2, 3, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(2, 3), rat(2, 3), rat(2, 3)]);
        assert!(matches!(
            Isocrystal::simple(7, 2, 4, 16),
            Err(IsocrystalError::NotLowestTerms(2, 4))
        ));
        assert!(matches!(
            Isocrystal::simple(7, 0, 3, 16),
            Err(IsocrystalError::NotLowestTerms(0, 3))
        ));
    }

    #[test]
    fn b_lambda_examples() {
        let iso = Isocrystal::b_lambda(5, 0, 1, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(0, 1)]);
        let iso = Isocrystal::b_lambda(5, 2, 3, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(-2, 3); 3]);
        let iso = Isocrystal::b_lambda(5, 1, 2, 16).unwrap();
        assert_eq!(slopes_of(&iso), vec![rat(-1, 2); 2]);
    }

    #[test]
    fn b_lambda_cubes_to_p_minus_d() {
        // iterate the matrix thrice: φ³ scales e_1 by p^{−2} when λ = 2/3
        let iso = Isocrystal::b_lambda(5, 2, 3, 16).unwrap();
        let ctx = iso.ctx();
        let m = iso.matrix();
        let cube = mat_mul(ctx, &mat_mul(ctx, m, m), m);
        let expect = ctx.p_power(-2);
        assert!(cube[0][0].eq_to_prec(&expect));
        assert!(cube[1][0].is_zero_to_prec());
        assert!(cube[2][0].is_zero_to_prec());
    }

    #[test]
    fn berkowitz_matches_cofactor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ctx = UnramifiedContext::new(3, 2, 16);
        for n in 1..=4usize {
            for _ in 0..5 {
                let m: Matrix = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| {
                                if rng.random_bool(0.2) {
                                    ctx.zero()
                                } else {
                                    ctx.random(&mut rng)
                                }
                            })
                            .collect()
                    })
                    .collect();
                let fast = berkowitz_char_poly(&ctx, &m);
                let slow = charpoly_cofactor(&ctx, &m);
                assert_eq!(fast.len(), slow.len());
                for (a, b) in fast.iter().zip(&slow) {
                    assert!(a.eq_to_prec(b), "charpoly mismatch at n={n}");
                }
            }
        }
    }

    #[test]
    fn base_change_invariance() {
        // scalar-entry matrices read over F_{p^m}: slopes must not move
        for m in 1..=3u32 {
            let diag = Isocrystal::diagonal_powers(5, m, 24, &[0, 1, 3]);
            assert_eq!(
                slopes_of(&diag),
                vec![rat(0, 1), rat(1, 1), rat(3, 1)],
                "base degree {m}"
            );
            let prec = recommended_precision(m, 2, 1);
            let base = Isocrystal::simple(5, 1, 2, prec).unwrap();
            let scalars: Vec<Vec<PadicNumber>> = base
                .matrix()
                .iter()
                .map(|row| row.iter().map(|e| e.coeffs()[0].clone()).collect())
                .collect();
            let lifted = Isocrystal::from_scalar_matrix(5, m, prec, &scalars).unwrap();
            assert_eq!(slopes_of(&lifted), vec![rat(1, 2), rat(1, 2)], "m={m}");
        }
    }

    #[test]
    fn tensor_additivity_on_diagonals() {
        let exps_a = [0i64, 1];
        let exps_b = [2i64, -1, 0];
        let mut sums = vec![];
        for x in exps_a {
            for y in exps_b {
                sums.push(x + y);
            }
        }
        let tensor = Isocrystal::diagonal_powers(7, 1, 24, &sums);
        let mut expect: Vec<Rat> = sums.iter().map(|&e| rat(e, 1)).collect();
        expect.sort();
        assert_eq!(slopes_of(&tensor), expect);
    }

    #[test]
    fn power_scaling_of_slopes() {
        // slopes of (M, φ^h) are h times the slopes of (M, φ), checked on the
        // linear (a = 1) side where φ^h is a plain matrix power
        let iso = Isocrystal::simple(3, 1, 2, 24).unwrap();
        let ctx = iso.ctx();
        let squared =
            Isocrystal::new(ctx.clone(), mat_mul(ctx, iso.matrix(), iso.matrix())).unwrap();
        let doubled = iso.newton_slopes().unwrap().scale(&rat(2, 1));
        assert_eq!(squared.newton_slopes().unwrap(), doubled);
    }

    #[test]
    fn singular_frobenius_detected() {
        let ctx = UnramifiedContext::new(5, 1, 16);
        let zero_row: Matrix = vec![
            vec![ctx.one(), ctx.zero()],
            vec![ctx.zero(), ctx.zero()],
        ];
        let iso = Isocrystal::new(ctx, zero_row).unwrap();
        assert_eq!(
            iso.newton_slopes().unwrap_err(),
            IsocrystalError::SingularFrobenius
        );
    }

    #[test]
    fn dm_class_examples() {
        let iso = Isocrystal::diagonal_powers(5, 1, 16, &[0, 1]);
        assert_eq!(iso.dm_class().unwrap(), vec![(rat(0, 1), 1), (rat(1, 1), 1)]);

        let iso = Isocrystal::simple(5, 1, 2, 16).unwrap();
        assert_eq!(iso.dm_class().unwrap(), vec![(rat(1, 2), 1)]);

        // block diagonal with two copies of the slope-1/2 module
        let one = Isocrystal::simple(5, 1, 2, 16).unwrap();
        let ctx = one.ctx().clone();
        let mut block: Matrix = (0..4).map(|_| (0..4).map(|_| ctx.zero()).collect()).collect();
        for (bi, bj) in [(0usize, 0usize), (2, 2)] {
            for i in 0..2 {
                for j in 0..2 {
                    block[bi + i][bj + j] = one.matrix()[i][j].clone();
                }
            }
        }
        let iso = Isocrystal::new(ctx, block).unwrap();
        assert_eq!(iso.dm_class().unwrap(), vec![(rat(1, 2), 2)]);
    }

    #[test]
    fn phi_n_validation() {
        let ctx = UnramifiedContext::new(5, 1, 16);
        // φ = diag(p, 1), N = E_{21}: Nφ = pφN holds
        let iso = Isocrystal::diagonal_powers(5, 1, 16, &[1, 0]);
        let mut n_mat: Matrix = vec![
            vec![ctx.zero(), ctx.zero()],
            vec![ctx.one(), ctx.zero()],
        ];
        let module = PhiNModule::new(iso.clone(), n_mat.clone()).unwrap();
        assert!(module.validate());

        // zero N is always valid
        n_mat[1][0] = ctx.zero();
        assert!(PhiNModule::new(iso.clone(), n_mat).unwrap().validate());

        // the identity is not nilpotent
        let id = mat_identity(&ctx, 2);
        assert!(!PhiNModule::new(iso, id).unwrap().validate());
    }

    #[test]
    fn json_round_trip() {
        let iso = Isocrystal::diagonal_powers(7, 1, 16, &[0, 1]);
        let json = serde_json::to_string(&iso).unwrap();
        let back: Isocrystal = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rank(), 2);
        assert_eq!(slopes_of(&back), vec![rat(0, 1), rat(1, 1)]);

        let ext = Isocrystal::diagonal_powers(5, 2, 16, &[1]);
        let json = serde_json::to_string(&ext).unwrap();
        let back: Isocrystal = serde_json::from_str(&json).unwrap();
        assert_eq!(back.base_degree(), 2);
        assert_eq!(slopes_of(&back), vec![rat(1, 1)]);
    }
}
