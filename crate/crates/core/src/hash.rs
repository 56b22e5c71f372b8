//! c-wise independent hashing: degree-(c-1) polynomials over GF(2^b).
//!
//! A family member is identified by its coefficients `a_{c-1}, ..., a_0`,
//! serialized highest degree first, most significant bit first. That bit
//! string is the seed the derandomizer fixes chunk by chunk.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Irreducible polynomial for each field width `b` in 2..=32, with the
/// leading `x^b` term included.
pub const MODULI: [u64; 31] = [
    0x7,
    0xB,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11B,
    0x211,
    0x409,
    0x805,
    0x1009,
    0x201B,
    0x4021,
    0x8003,
    0x1002B,
    0x20009,
    0x40081,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001B,
    0x2000009,
    0x400001B,
    0x8000027,
    0x10000009,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008D,
];

pub const MIN_FIELD_BITS: u32 = 2;
pub const MAX_FIELD_BITS: u32 = 32;
const TABLE_MAX_BITS: u32 = 16;

pub fn modulus(b: u32) -> Option<u64> {
    (MIN_FIELD_BITS..=MAX_FIELD_BITS)
        .contains(&b)
        .then(|| MODULI[(b - MIN_FIELD_BITS) as usize])
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("invalid hash parameters: {0}")]
    InvalidParams(String),
    #[error("input {x} outside the hash domain of {domain_bits} bits")]
    DomainOverflow { x: u64, domain_bits: u32 },
    #[error("range {r} must lie in [1, 2^{field_bits}]")]
    BadRange { r: u64, field_bits: u32 },
    #[error("seed has {got} bits, expected {expected}")]
    SeedLength { got: usize, expected: usize },
    #[error("enumeration needs {needed} bits, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
}

/// Bit string, bit 0 first. Ordering is lexicographic on the bits for
/// strings of equal length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (63 - i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Reads `width <= 64` bits starting at `start` as an unsigned integer,
    /// first bit most significant.
    pub fn read_uint(&self, start: usize, width: usize) -> u64 {
        assert!(width <= 64 && start + width <= self.len);
        let mut v = 0u64;
        for i in start..start + width {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    pub fn write_uint(&mut self, start: usize, width: usize, value: u64) {
        assert!(width <= 64 && start + width <= self.len);
        for j in 0..width {
            let bit = (value >> (width - 1 - j)) & 1 == 1;
            self.set(start + j, bit);
        }
    }

    pub fn from_uint(len: usize, value: u64) -> Self {
        let mut s = Self::zeros(len);
        let w = len.min(64);
        s.write_uint(len - w, w, value & mask64(w));
        s
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = BitString::zeros(self.len + other.len);
        for i in 0..self.len {
            out.set(i, self.get(i));
        }
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        let mut out = BitString::zeros(len);
        for i in 0..len {
            out.set(i, self.get(start + i));
        }
        out
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Lowercase hex, left-aligned: the last digit is zero-padded on the
    /// right when `len` is not a multiple of 4.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in 0..digits {
            let mut nib = 0u32;
            for j in 0..4 {
                let i = d * 4 + j;
                nib = (nib << 1) | (i < self.len && self.get(i)) as u32;
            }
            s.push(char::from_digit(nib, 16).unwrap());
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Option<BitString> {
        if hex.len() != len.div_ceil(4) {
            return None;
        }
        let mut out = BitString::zeros(len);
        for (d, ch) in hex.chars().enumerate() {
            let nib = ch.to_digit(16)?;
            for j in 0..4 {
                let bit = (nib >> (3 - j)) & 1 == 1;
                let i = d * 4 + j;
                if i < len {
                    out.set(i, bit);
                } else if bit {
                    return None;
                }
            }
        }
        Some(out)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:{})", self.len, self.to_hex())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn mask64(w: usize) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Arithmetic in GF(2^b). Widths up to 16 use log/exp tables.
#[derive(Debug)]
pub struct Field {
    bits: u32,
    modulus: u64,
    log: Vec<u32>,
    exp: Vec<u32>,
}

impl Field {
    fn build(bits: u32) -> Field {
        let modulus = modulus(bits).expect("field width in table");
        let mut f = Field {
            bits,
            modulus,
            log: Vec::new(),
            exp: Vec::new(),
        };
        if bits <= TABLE_MAX_BITS {
            let order = (1u64 << bits) - 1;
            // smallest generator of the multiplicative group
            let g = (2..=order)
                .find(|&g| f.element_order(g) == order)
                .expect("multiplicative group is cyclic");
            let size = 1usize << bits;
            let mut exp = vec![0u32; 2 * size];
            let mut log = vec![0u32; size];
            let mut x = 1u64;
            for (i, e) in exp.iter_mut().take(order as usize).enumerate() {
                *e = x as u32;
                log[x as usize] = i as u32;
                x = f.mul_slow(x, g);
            }
            for i in order as usize..2 * size {
                exp[i] = exp[i - order as usize];
            }
            f.log = log;
            f.exp = exp;
        }
        f
    }

    fn element_order(&self, g: u64) -> u64 {
        let order = (1u64 << self.bits) - 1;
        let mut x = g;
        let mut k = 1;
        while x != 1 {
            x = self.mul_slow(x, g);
            k += 1;
            if k > order {
                break;
            }
        }
        k
    }

    fn mul_slow(&self, a: u64, b: u64) -> u64 {
        let mut acc = 0u64;
        let mut a = a;
        let mut b = b;
        let top = 1u64 << self.bits;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    /// Shared instance for width `b` (2..=32).
    pub fn get(b: u32) -> &'static Field {
        static FIELDS: [OnceLock<Field>; 31] = [const { OnceLock::new() }; 31];
        assert!((MIN_FIELD_BITS..=MAX_FIELD_BITS).contains(&b), "field width {b}");
        FIELDS[(b - MIN_FIELD_BITS) as usize].get_or_init(|| Field::build(b))
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.log.is_empty() {
            return self.mul_slow(a as u64, b as u64) as u32;
        }
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }
}

/// Shape of a family: inputs `< 2^a`, outputs in GF(2^b), independence `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct HashFamilyParams {
    pub domain_bits: u32,
    pub field_bits: u32,
    pub independence: u32,
}

impl HashFamilyParams {
    pub fn new(domain_bits: u32, field_bits: u32, independence: u32) -> Result<Self, HashError> {
        if !(MIN_FIELD_BITS..=MAX_FIELD_BITS).contains(&field_bits) {
            return Err(HashError::InvalidParams(format!(
                "field bits {field_bits} outside [{MIN_FIELD_BITS}, {MAX_FIELD_BITS}]"
            )));
        }
        if domain_bits > field_bits {
            return Err(HashError::InvalidParams(format!(
                "domain of {domain_bits} bits does not embed in GF(2^{field_bits})"
            )));
        }
        if independence == 0 || independence as u64 > (1u64 << field_bits) {
            return Err(HashError::InvalidParams(format!(
                "independence {independence} must lie in [1, 2^{field_bits}]"
            )));
        }
        Ok(Self {
            domain_bits,
            field_bits,
            independence,
        })
    }

    pub fn seed_bits(&self) -> usize {
        (self.independence * self.field_bits) as usize
    }

    pub fn field(&self) -> &'static Field {
        Field::get(self.field_bits)
    }
}

/// Coefficients `a_{c-1}, ..., a_0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HashSeed {
    coefficients: Vec<u32>,
    field_bits: u32,
}

impl HashSeed {
    pub fn from_coefficients(params: &HashFamilyParams, coefficients: Vec<u32>) -> Result<Self, HashError> {
        if coefficients.len() != params.independence as usize {
            return Err(HashError::InvalidParams(format!(
                "expected {} coefficients, got {}",
                params.independence,
                coefficients.len()
            )));
        }
        let limit = 1u64 << params.field_bits;
        if let Some(&a) = coefficients.iter().find(|&&a| a as u64 >= limit) {
            return Err(HashError::InvalidParams(format!(
                "coefficient {a} outside GF(2^{})",
                params.field_bits
            )));
        }
        Ok(Self {
            coefficients,
            field_bits: params.field_bits,
        })
    }

    /// Decodes `params.seed_bits()` bits starting at `offset`.
    pub fn from_bits_at(params: &HashFamilyParams, bits: &BitString, offset: usize) -> Result<Self, HashError> {
        let need = params.seed_bits();
        if offset + need > bits.len() {
            return Err(HashError::SeedLength {
                got: bits.len().saturating_sub(offset),
                expected: need,
            });
        }
        let b = params.field_bits as usize;
        let coefficients = (0..params.independence as usize)
            .map(|j| bits.read_uint(offset + j * b, b) as u32)
            .collect();
        Ok(Self {
            coefficients,
            field_bits: params.field_bits,
        })
    }

    pub fn from_bits(params: &HashFamilyParams, bits: &BitString) -> Result<Self, HashError> {
        if bits.len() != params.seed_bits() {
            return Err(HashError::SeedLength {
                got: bits.len(),
                expected: params.seed_bits(),
            });
        }
        Self::from_bits_at(params, bits, 0)
    }

    pub fn to_bits(&self) -> BitString {
        let b = self.field_bits as usize;
        let mut out = BitString::zeros(b * self.coefficients.len());
        for (j, &a) in self.coefficients.iter().enumerate() {
            out.write_uint(j * b, b, a as u64);
        }
        out
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.coefficients
    }

    pub fn to_hex(&self) -> String {
        self.to_bits().to_hex()
    }
}

/// Output range `[0, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeSpec {
    pub r: u64,
}

impl RangeSpec {
    pub fn new(r: u64, params: &HashFamilyParams) -> Result<Self, HashError> {
        if r == 0 || r > 1u64 << params.field_bits {
            return Err(HashError::BadRange {
                r,
                field_bits: params.field_bits,
            });
        }
        Ok(Self { r })
    }
}

/// A family member ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct HashFunction {
    params: HashFamilyParams,
    seed: HashSeed,
    field: &'static Field,
}

impl HashFunction {
    pub fn new(params: HashFamilyParams, seed: HashSeed) -> Result<Self, HashError> {
        if seed.coefficients.len() != params.independence as usize || seed.field_bits != params.field_bits {
            return Err(HashError::InvalidParams("seed does not match parameters".into()));
        }
        Ok(Self {
            params,
            seed,
            field: params.field(),
        })
    }

    pub fn params(&self) -> &HashFamilyParams {
        &self.params
    }

    pub fn seed(&self) -> &HashSeed {
        &self.seed
    }

    /// Horner evaluation; the caller guarantees `x < 2^a`.
    #[inline]
    pub fn eval_unchecked(&self, x: u64) -> u32 {
        let x = x as u32;
        let mut acc = 0u32;
        for &a in &self.seed.coefficients {
            acc = self.field.mul(acc, x) ^ a;
        }
        acc
    }

    pub fn eval(&self, x: u64) -> Result<u32, HashError> {
        check_domain(&self.params, x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_range_unchecked(&self, x: u64, r: u64) -> u64 {
        reduce_range(self.eval_unchecked(x), self.params.field_bits, r)
    }

    pub fn eval_range(&self, x: u64, range: RangeSpec) -> Result<u64, HashError> {
        check_domain(&self.params, x)?;
        Ok(self.eval_range_unchecked(x, range.r))
    }
}

fn check_domain(params: &HashFamilyParams, x: u64) -> Result<(), HashError> {
    if params.domain_bits < 64 && x >> params.domain_bits != 0 {
        return Err(HashError::DomainOverflow {
            x,
            domain_bits: params.domain_bits,
        });
    }
    Ok(())
}

/// `floor(h * r / 2^b)`.
#[inline]
pub fn reduce_range(h: u32, field_bits: u32, r: u64) -> u64 {
    ((h as u128 * r as u128) >> field_bits) as u64
}

pub fn evaluate(params: &HashFamilyParams, seed: &HashSeed, x: u64) -> Result<u32, HashError> {
    HashFunction::new(*params, seed.clone())?.eval(x)
}

pub fn evaluate_range(params: &HashFamilyParams, seed: &HashSeed, x: u64, range: RangeSpec) -> Result<u64, HashError> {
    HashFunction::new(*params, seed.clone())?.eval_range(x, range)
}

/// Joint output frequencies of a tuple of inputs over every seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceCensus {
    pub params: HashFamilyParams,
    pub inputs: Vec<u64>,
    pub seeds: u64,
    /// Indexed by the outputs read as base-`2^b` digits, first input most
    /// significant.
    pub counts: Vec<u64>,
}

impl IndependenceCensus {
    /// True when every output tuple appears equally often.
    pub fn is_uniform(&self) -> bool {
        let expected = self.seeds / self.counts.len() as u64;
        self.seeds.is_multiple_of(self.counts.len() as u64) && self.counts.iter().all(|&c| c == expected)
    }

    pub fn count(&self, outputs: &[u32]) -> u64 {
        let b = self.params.field_bits;
        let idx = outputs.iter().fold(0usize, |acc, &o| (acc << b) | o as usize);
        self.counts[idx]
    }
}

/// Enumerates all `2^{cb}` seeds and tabulates the outputs on `inputs`.
pub fn independence_census(
    params: &HashFamilyParams,
    inputs: &[u64],
    budget_bits: usize,
) -> Result<IndependenceCensus, HashError> {
    let seed_bits = params.seed_bits();
    let table_bits = inputs.len() * params.field_bits as usize;
    let needed = seed_bits.max(table_bits);
    if needed > budget_bits || needed >= 63 {
        return Err(HashError::BudgetExceeded {
            needed,
            budget: budget_bits,
        });
    }
    for &x in inputs {
        check_domain(params, x)?;
    }
    let field = params.field();
    let b = params.field_bits;
    let c = params.independence as usize;
    let mask = (1u64 << b) - 1;
    let mut counts = vec![0u64; 1usize << table_bits];
    let mut coeffs = vec![0u32; c];
    for s in 0..1u64 << seed_bits {
        for (j, a) in coeffs.iter_mut().enumerate() {
            *a = ((s >> ((c - 1 - j) as u32 * b)) & mask) as u32;
        }
        let mut idx = 0usize;
        for &x in inputs {
            let mut acc = 0u32;
            for &a in &coeffs {
                acc = field.mul(acc, x as u32) ^ a;
            }
            idx = (idx << b) | acc as usize;
        }
        counts[idx] += 1;
    }
    Ok(IndependenceCensus {
        params: *params,
        inputs: inputs.to_vec(),
        seeds: 1u64 << seed_bits,
        counts,
    })
}

/// Distribution of `Z = #{i : floor(h(x_i) r / 2^b) = target}` over every
/// seed; entry `z` counts the seeds giving `Z = z`.
pub fn hit_count_distribution(
    params: &HashFamilyParams,
    inputs: &[u64],
    r: u64,
    target: u64,
    budget_bits: usize,
) -> Result<Vec<u64>, HashError> {
    let seed_bits = params.seed_bits();
    if seed_bits > budget_bits || seed_bits >= 63 {
        return Err(HashError::BudgetExceeded {
            needed: seed_bits,
            budget: budget_bits,
        });
    }
    RangeSpec::new(r, params)?;
    for &x in inputs {
        check_domain(params, x)?;
    }
    let field = params.field();
    let b = params.field_bits;
    let c = params.independence as usize;
    let mask = (1u64 << b) - 1;
    let mut dist = vec![0u64; inputs.len() + 1];
    let mut coeffs = vec![0u32; c];
    for s in 0..1u64 << seed_bits {
        for (j, a) in coeffs.iter_mut().enumerate() {
            *a = ((s >> ((c - 1 - j) as u32 * b)) & mask) as u32;
        }
        let mut z = 0;
        for &x in inputs {
            let mut acc = 0u32;
            for &a in &coeffs {
                acc = field.mul(acc, x as u32) ^ a;
            }
            if reduce_range(acc, b, r) == target {
                z += 1;
            }
        }
        dist[z] += 1;
    }
    Ok(dist)
}

/// Tail bound `2 (c t / λ²)^{c/2}` for a sum of `t` c-wise independent
/// variables in `[0, 1]`.
pub fn tail_bound(c: u32, t: usize, lambda: f64) -> f64 {
    2.0 * (c as f64 * t as f64 / (lambda * lambda)).powf(c as f64 / 2.0)
}

/// Smallest `a` with `2^a >= count` (at least 1).
pub fn bits_for(count: u64) -> u32 {
    if count <= 2 {
        1
    } else {
        64 - (count - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent carry-less multiply followed by long division.
    fn oracle_mul(a: u64, b: u64, bits: u32) -> u64 {
        let mut prod: u128 = 0;
        for i in 0..64 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u128) << i;
            }
        }
        let m = modulus(bits).unwrap() as u128;
        for i in (bits as usize..128).rev() {
            if (prod >> i) & 1 == 1 {
                prod ^= m << (i - bits as usize);
            }
        }
        prod as u64
    }

    fn oracle_eval(coeffs: &[u32], x: u64, bits: u32) -> u64 {
        // sum of a_j x^j with explicit powers
        let c = coeffs.len();
        let mut total = 0u64;
        for (j, &a) in coeffs.iter().enumerate() {
            let deg = c - 1 - j;
            let mut p = 1u64;
            for _ in 0..deg {
                p = oracle_mul(p, x, bits);
            }
            total ^= oracle_mul(a as u64, p, bits);
        }
        total
    }

    fn params(a: u32, b: u32, c: u32) -> HashFamilyParams {
        HashFamilyParams::new(a, b, c).unwrap()
    }

    #[test]
    fn moduli_have_no_small_factors() {
        // trial division by every polynomial of degree <= 8 rules out small factors
        for b in MIN_FIELD_BITS..=MAX_FIELD_BITS {
            let m = modulus(b).unwrap();
            assert_eq!(63 - m.leading_zeros(), b);
            for f in 2u64..512 {
                let deg = 63 - f.leading_zeros();
                if deg == 0 || deg >= b {
                    continue;
                }
                let mut r = m;
                while r != 0 && 63 - r.leading_zeros() >= deg {
                    r ^= f << (63 - r.leading_zeros() - deg);
                }
                assert_ne!(r, 0, "b={b} divisible by {f:#x}");
            }
        }
    }

    #[test]
    fn small_fields_are_fields() {
        for b in 2..=8 {
            let f = Field::get(b);
            let size = 1u32 << b;
            for x in 1..size {
                let inv = (1..size).filter(|&y| f.mul(x, y) == 1).count();
                assert_eq!(inv, 1, "b={b} x={x}");
            }
        }
    }

    #[test]
    fn table_and_shift_multiply_agree_with_oracle() {
        let mut rng = 0x9e3779b97f4a7c15u64;
        for b in MIN_FIELD_BITS..=MAX_FIELD_BITS {
            let f = Field::get(b);
            let mask = (1u64 << b) - 1;
            for _ in 0..200 {
                rng ^= rng << 13;
                rng ^= rng >> 7;
                rng ^= rng << 17;
                let x = rng & mask;
                let y = (rng >> 32) & mask;
                assert_eq!(f.mul(x as u32, y as u32) as u64, oracle_mul(x, y, b), "b={b}");
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let p = params(4, 4, 2);
        let id = HashSeed::from_coefficients(&p, vec![1, 0]).unwrap();
        assert_eq!(evaluate(&p, &id, 5).unwrap(), 5);

        let p = params(2, 2, 2);
        let k = HashSeed::from_coefficients(&p, vec![0, 3]).unwrap();
        for x in 0..4 {
            assert_eq!(evaluate(&p, &k, x).unwrap(), 3);
        }
        assert_eq!(modulus(2), Some(0b111));
        let s = HashSeed::from_coefficients(&p, vec![2, 1]).unwrap();
        assert_eq!(evaluate(&p, &s, 3).unwrap(), 0);

        assert_eq!(
            evaluate(&p, &s, 4),
            Err(HashError::DomainOverflow { x: 4, domain_bits: 2 })
        );
    }

    #[test]
    fn evaluate_range_examples() {
        assert_eq!(reduce_range(5, 4, 3), 0);
        assert_eq!(reduce_range(11, 4, 3), 2);
        assert_eq!(reduce_range(9, 4, 16), 9);
        let mut sizes = [0; 3];
        for h in 0..16 {
            sizes[reduce_range(h, 4, 3) as usize] += 1;
        }
        assert_eq!(sizes, [6, 5, 5]);
        let p = params(4, 4, 1);
        assert!(RangeSpec::new(17, &p).is_err());
        assert!(RangeSpec::new(0, &p).is_err());
    }

    #[test]
    fn census_examples() {
        let p = params(2, 2, 2);
        let pair = independence_census(&p, &[0, 1], 24).unwrap();
        assert_eq!(pair.seeds, 16);
        assert!(pair.counts.iter().all(|&c| c == 1));
        let single = independence_census(&p, &[1], 24).unwrap();
        assert_eq!(single.counts, vec![4, 4, 4, 4]);
        let constant = independence_census(&params(2, 2, 1), &[0, 1], 24).unwrap();
        assert!(!constant.is_uniform());
        assert_eq!(constant.count(&[2, 2]), 1);
        assert_eq!(constant.count(&[2, 3]), 0);
        assert!(matches!(
            independence_census(&params(8, 8, 4), &[0], 24),
            Err(HashError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(HashFamilyParams::new(5, 4, 2).is_err());
        assert!(HashFamilyParams::new(2, 2, 5).is_err());
        assert!(HashFamilyParams::new(2, 2, 0).is_err());
        assert!(HashFamilyParams::new(1, 1, 1).is_err());
        assert!(HashFamilyParams::new(2, 2, 4).is_ok());
    }

    #[test]
    fn hex_round_trip() {
        let s = BitString::from_uint(10, 0b10_1100_0111);
        assert_eq!(s.to_hex(), "b1c");
        assert_eq!(BitString::from_hex("b1c", 10), Some(s));
        assert_eq!(BitString::from_hex("b1d", 10), None);
    }

    #[test]
    fn bits_for_examples() {
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4096), 12);
        assert_eq!(bits_for(4097), 13);
    }

    proptest! {
        #[test]
        fn evaluation_matches_oracle(b in 2u32..=32, c in 1u32..6, raw in proptest::collection::vec(any::<u32>(), 6), x in any::<u64>()) {
            // c <= 2^b is a family precondition
            let c = c.min(1 << b.min(5));
            let p = params(b, b, c);
            let mask = ((1u64 << b) - 1) as u32;
            let coeffs: Vec<u32> = raw[..c as usize].iter().map(|v| v & mask).collect();
            let seed = HashSeed::from_coefficients(&p, coeffs.clone()).unwrap();
            let x = x & mask as u64;
            prop_assert_eq!(evaluate(&p, &seed, x).unwrap() as u64, oracle_eval(&coeffs, x, b));
        }

        #[test]
        fn seed_bits_round_trip(b in 2u32..=32, c in 1u32..6, raw in proptest::collection::vec(any::<u32>(), 6)) {
            // c <= 2^b is a family precondition
            let c = c.min(1 << b.min(5));
            let p = params(b, b, c);
            let mask = ((1u64 << b) - 1) as u32;
            let coeffs: Vec<u32> = raw[..c as usize].iter().map(|v| v & mask).collect();
            let seed = HashSeed::from_coefficients(&p, coeffs.clone()).unwrap();
            let bits = seed.to_bits();
            prop_assert_eq!(bits.len(), (b * c) as usize);
            // highest-degree coefficient occupies the leading bits
            prop_assert_eq!(bits.read_uint(0, b as usize) as u32, coeffs[0]);
            prop_assert_eq!(HashSeed::from_bits(&p, &bits).unwrap(), seed);
        }

        #[test]
        fn range_buckets_differ_by_at_most_one(b in 2u32..=12, r_frac in 0.0f64..1.0) {
            let size = 1u64 << b;
            let r = 1 + (r_frac * (size - 1) as f64) as u64;
            let mut counts = vec![0u64; r as usize];
            for h in 0..size {
                counts[reduce_range(h as u32, b, r) as usize] += 1;
            }
            let lo = *counts.iter().min().unwrap();
            let hi = *counts.iter().max().unwrap();
            prop_assert!(hi - lo <= 1);
        }

        #[test]
        fn census_is_uniform_on_distinct_tuples(b in 2u32..=5, c in 1u32..=4, picks in proptest::collection::vec(any::<u32>(), 4), t in 1usize..=4) {
            prop_assume!(c as usize * b as usize <= 16);
            let p = params(b, b, c);
            let size = 1u32 << b;
            let mut inputs: Vec<u64> = Vec::new();
            for v in picks {
                let x = (v % size) as u64;
                if !inputs.contains(&x) && inputs.len() < t.min(c as usize) {
                    inputs.push(x);
                }
            }
            let census = independence_census(&p, &inputs, 24).unwrap();
            prop_assert!(census.is_uniform());
        }
    }
}
