//! Arithmetic in finite fields F_{p^h}.
//!
//! Extensions are presented as F_p[x]/(g) for a monic irreducible g of degree
//! h. The modulus is found by a deterministic search: coefficient vectors
//! (c_0, …, c_{h−1}) are enumerated in base-p counter order and the first
//! irreducible `x^h + c_{h−1}x^{h−1} + ⋯ + c_0` wins, so the same extension is
//! produced on every run and platform. For h = 1 this yields the modulus `x`,
//! i.e. the prime field itself.

use std::fmt;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn invmod(a: u64, p: u64) -> u64 {
    // p prime, a ≢ 0
    powmod(a % p, p - 2, p)
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

// -- dense polynomials over F_p, coefficient of x^i at index i --------------

fn poly_trim(c: &mut Vec<u64>) {
    while c.last() == Some(&0) {
        c.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(ai, bj, p)) % p;
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    // m monic
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for (j, &mj) in m.iter().enumerate() {
            let idx = j + shift;
            let sub = mulmod(lead, mj, p);
            r[idx] = (r[idx] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        // make b monic before reducing
        let lead_inv = invmod(*b.last().unwrap(), p);
        let monic: Vec<u64> = b.iter().map(|&c| mulmod(c, lead_inv, p)).collect();
        let r = poly_rem(&a, &monic, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod_x(e_base: u64, e_exp: u32, m: &[u64], p: u64) -> Vec<u64> {
    // x^(e_base^e_exp) mod m by repeated powering
    let mut acc = vec![0, 1]; // x
    for _ in 0..e_exp {
        acc = poly_pow(&acc, e_base, m, p);
    }
    acc
}

fn poly_pow(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut base = poly_rem(a, m, p);
    let mut acc = vec![1];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &base, p), m, p);
        }
        base = poly_rem(&poly_mul(&base, &base, p), m, p);
        e >>= 1;
    }
    acc
}

/// Irreducibility of a monic polynomial of degree h over F_p:
/// x^(p^h) ≡ x mod g, and gcd(x^(p^(h/q)) − x, g) = 1 for every prime q | h.
pub fn is_irreducible(g: &[u64], p: u64) -> bool {
    let h = (g.len() - 1) as u32;
    if h == 0 {
        return false;
    }
    if h == 1 {
        return true;
    }
    let xqh = poly_powmod_x(p, h, g, p);
    // x^(p^h) − x must be 0 mod g
    let mut diff = xqh;
    if diff.len() < 2 {
        diff.resize(2, 0);
    }
    diff[1] = (diff[1] + p - 1) % p;
    poly_trim(&mut diff);
    if !diff.is_empty() {
        return false;
    }
    let mut primes = vec![];
    let mut n = h;
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            primes.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    for q in primes {
        let sub = h / q;
        let xq = poly_powmod_x(p, sub, g, p);
        let mut diff = xq;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        poly_trim(&mut diff);
        if diff.is_empty() {
            return false; // x^(p^sub) = x mod g: g has a factor of degree ≤ sub
        }
        let g1 = poly_gcd(&diff, g, p);
        if g1.len() != 1 {
            return false;
        }
    }
    true
}

/// The canonical monic irreducible of degree h over F_p, as coefficients
/// `[c_0, …, c_{h−1}, 1]`.
pub fn find_modulus(p: u64, h: u32) -> Vec<u64> {
    assert!(h >= 1, "extension degree must be positive");
    if h == 1 {
        return vec![0, 1]; // x
    }
    let mut counter = vec![0u64; h as usize];
    loop {
        let mut g = counter.clone();
        g.push(1);
        if is_irreducible(&g, p) {
            return g;
        }
        // increment base-p counter
        let mut i = 0;
        loop {
            counter[i] += 1;
            if counter[i] < p {
                break;
            }
            counter[i] = 0;
            i += 1;
            assert!(
                i < counter.len(),
                "no irreducible of degree {h} over F_{p}; unreachable"
            );
        }
    }
}

/// The field F_{p^h} = F_p[x]/(g) with the canonical modulus g.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqContext {
    p: u64,
    h: u32,
    modulus: Vec<u64>,
}

/// An element of F_{p^h}: coefficients of 1, x, …, x^{h−1}, each in [0, p).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElement {
    pub coeffs: Vec<u64>,
}

impl FqContext {
    pub fn new(p: u64, h: u32) -> Self {
        FqContext {
            p,
            h,
            modulus: find_modulus(p, h),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.h
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.h)
    }

    pub fn elem(&self, coeffs: &[u64]) -> FqElement {
        let mut c: Vec<u64> = coeffs.iter().map(|&x| x % self.p).collect();
        c.resize(self.h as usize, 0);
        let r = poly_rem(&c, &self.modulus, self.p);
        let mut c = r;
        c.resize(self.h as usize, 0);
        FqElement { coeffs: c }
    }

    pub fn zero(&self) -> FqElement {
        FqElement {
            coeffs: vec![0; self.h as usize],
        }
    }

    pub fn one(&self) -> FqElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, n: u64) -> FqElement {
        let mut coeffs = vec![0; self.h as usize];
        coeffs[0] = n % self.p;
        FqElement { coeffs }
    }

    /// The class of x, a generator of the extension.
    pub fn gen(&self) -> FqElement {
        if self.h == 1 {
            return self.zero();
        }
        let mut coeffs = vec![0; self.h as usize];
        coeffs[1] = 1;
        FqElement { coeffs }
    }

    pub fn add(&self, a: &FqElement, b: &FqElement) -> FqElement {
        FqElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| (x + y) % self.p)
                .collect(),
        }
    }

    pub fn sub(&self, a: &FqElement, b: &FqElement) -> FqElement {
        FqElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| (x + self.p - y) % self.p)
                .collect(),
        }
    }

    pub fn neg(&self, a: &FqElement) -> FqElement {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let prod = poly_mul(&a.coeffs, &b.coeffs, self.p);
        let mut r = poly_rem(&prod, &self.modulus, self.p);
        r.resize(self.h as usize, 0);
        FqElement { coeffs: r }
    }

    pub fn pow(&self, a: &FqElement, mut e: u64) -> FqElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElement) -> Option<FqElement> {
        if a.is_zero() {
            return None;
        }
        Some(self.pow(a, self.order() - 2))
    }

    pub fn is_zero(&self, a: &FqElement) -> bool {
        a.is_zero()
    }

    /// x ↦ x^p, the Frobenius of the extension.
    pub fn frobenius(&self, a: &FqElement) -> FqElement {
        self.pow(a, self.p)
    }

    /// All q elements, in base-p counter order of their coefficient vectors.
    pub fn all_elements(&self) -> Vec<FqElement> {
        let mut out = Vec::with_capacity(self.order() as usize);
        let mut coeffs = vec![0u64; self.h as usize];
        loop {
            out.push(FqElement {
                coeffs: coeffs.clone(),
            });
            let mut i = 0;
            loop {
                if i == coeffs.len() {
                    return out;
                }
                coeffs[i] += 1;
                if coeffs[i] < self.p {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }

    /// Evaluates a polynomial with F_p coefficients at a point of F_{p^h}.
    pub fn eval_fp_poly(&self, poly: &[u64], at: &FqElement) -> FqElement {
        let mut acc = self.zero();
        for &c in poly.iter().rev() {
            acc = self.mul(&acc, at);
            acc = self.add(&acc, &self.from_u64(c));
        }
        acc
    }

    /// Roots in F_{p^h} of a polynomial with F_p coefficients, by brute force.
    pub fn roots_of_fp_poly(&self, poly: &[u64]) -> Vec<FqElement> {
        self.all_elements()
            .into_iter()
            .filter(|z| self.eval_fp_poly(poly, z).is_zero())
            .collect()
    }

    /// Whether an element lies in the prime field.
    pub fn in_prime_field(&self, a: &FqElement) -> bool {
        a.coeffs.iter().skip(1).all(|&c| c == 0)
    }

    /// Index of an element in `all_elements` order.
    pub fn index_of(&self, a: &FqElement) -> usize {
        let mut idx = 0usize;
        for &c in a.coeffs.iter().rev() {
            idx = idx * self.p as usize + c as usize;
        }
        idx
    }
}

impl FqElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 || self.coeffs.iter().skip(1).all(|&c| c == 0) {
            return write!(f, "{}", self.coeffs.first().unwrap_or(&0));
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c == 1 => write!(f, "w")?,
                1 => write!(f, "{c}w")?,
                _ if c == 1 => write!(f, "w^{i}")?,
                _ => write!(f, "{c}w^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_moduli() {
        // first irreducibles in base-p counter order
        assert_eq!(find_modulus(2, 2), vec![1, 1, 1]); // x^2+x+1
        assert_eq!(find_modulus(2, 3), vec![1, 1, 0, 1]); // x^3+x+1
        assert_eq!(find_modulus(7, 1), vec![0, 1]);
        let g = find_modulus(7, 2);
        assert!(is_irreducible(&g, 7));
        let g = find_modulus(3, 4);
        assert!(is_irreducible(&g, 3));
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn field_axioms_smoke() {
        let f = FqContext::new(5, 2);
        let els = f.all_elements();
        assert_eq!(els.len(), 25);
        for a in els.iter().take(8) {
            for b in els.iter().take(8) {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.add(a, b), f.add(b, a));
            }
            if !a.is_zero() {
                let inv = f.inv(a).unwrap();
                assert_eq!(f.mul(a, &inv), f.one());
            }
        }
    }

    #[test]
    fn frobenius_order() {
        let f = FqContext::new(3, 4);
        let w = f.gen();
        let mut x = w.clone();
        for _ in 0..4 {
            x = f.frobenius(&x);
        }
        assert_eq!(x, w);
        // but not earlier
        assert_ne!(f.frobenius(&w), w);
    }

    #[test]
    fn omega_squared_in_f4() {
        // with modulus x^2+ x + 1 over F_2: w·w = w + 1
        let f = FqContext::new(2, 2);
        let w = f.gen();
        let w2 = f.mul(&w, &w);
        assert_eq!(w2, f.elem(&[1, 1]));
    }

    #[test]
    fn roots_brute_force() {
        let f = FqContext::new(5, 2);
        // x^2 + 4x + 1 has no roots in F_5 but two in F_25
        let roots = f.roots_of_fp_poly(&[1, 4, 1]);
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|r| !f.in_prime_field(r)));
    }
}
