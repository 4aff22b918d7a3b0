//! Ancilla windows and their spectral filters.
//!
//! All filters are functions of a real offset `q` measured in units of
//! `1/2^m` of a phase turn. They are `2^m`-periodic, so arguments are first
//! reduced into `[-2^(m-1), 2^(m-1)]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statevector::C64;

/// Largest ancilla width accepted by the analytic filter evaluators.
pub const MAX_ANALYTIC_M: u32 = 30;
/// Largest ancilla width for a simulated window register.
pub const MAX_WINDOW_M: u32 = 14;

const SINGULAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    Rectangular,
    Cosine,
}

impl WindowKind {
    pub const ALL: [WindowKind; 2] = [WindowKind::Rectangular, WindowKind::Cosine];

    pub fn short_name(self) -> &'static str {
        match self {
            WindowKind::Rectangular => "rect",
            WindowKind::Cosine => "cos",
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Rectangular => "rectangular",
            WindowKind::Cosine => "cosine",
        })
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(WindowKind::Rectangular),
            "cos" | "cosine" => Ok(WindowKind::Cosine),
            other => Err(Error::InvalidParameter(format!("unknown window kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    m: u32,
    kind: WindowKind,
}

impl WindowSpec {
    pub fn new(m: u32, kind: WindowKind) -> Result<Self> {
        if !(1..=MAX_WINDOW_M).contains(&m) {
            return Err(Error::AncillaRange { m, min: 1, max: MAX_WINDOW_M });
        }
        Ok(Self { m, kind })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        1 << self.m
    }
}

/// `sin(pi x)`, exactly zero at integers.
pub fn sinpi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * r).sin()
}

/// `cos(pi x)`, exactly zero at half-integers.
pub fn cospi(x: f64) -> f64 {
    let a = (x - 2.0 * (x / 2.0).round()).abs();
    if a <= 0.5 {
        (PI * (0.5 - a)).sin()
    } else {
        -(PI * (a - 0.5)).sin()
    }
}

fn check_m(m: u32) -> f64 {
    assert!(
        (1..=MAX_ANALYTIC_M).contains(&m),
        "ancilla width m = {m} outside 1..={MAX_ANALYTIC_M}"
    );
    (1u64 << m) as f64
}

/// Reduces `q` modulo `size` into `[-size/2, size/2]`.
pub fn reduce_offset(q: f64, size: f64) -> f64 {
    q - size * (q / size).round()
}

/// Normalized Dirichlet kernel `sin(pi u) / (M sin(pi u / M))` for `|u| < M`.
pub fn dirichlet(u: f64, size: f64) -> f64 {
    if u.abs() < SINGULAR_TOL {
        1.0 - (PI * PI * u * u / 6.0) * (1.0 - 1.0 / (size * size))
    } else {
        sinpi(u) / (size * sinpi(u / size))
    }
}

/// Window amplitudes in label order `x = -2^(m-1) .. 2^(m-1) - 1`.
pub fn window_amplitudes(spec: WindowSpec) -> Vec<C64> {
    let size = spec.size();
    let half = (size / 2) as i64;
    let norm = 1.0 / (size as f64).sqrt();
    (-half..half)
        .map(|x| match spec.kind {
            WindowKind::Rectangular => C64::new(norm, 0.0),
            WindowKind::Cosine => {
                C64::new(std::f64::consts::SQRT_2 * cospi(x as f64 / size as f64) * norm, 0.0)
            }
        })
        .collect()
}

/// Rectangular-window filter `G(q) = e^{i pi q/M} sin(pi q) / (M sin(pi q/M))`.
pub fn filter_rect(q: f64, m: u32) -> C64 {
    let size = check_m(m);
    let u = reduce_offset(q, size);
    C64::from_polar(1.0, PI * u / size) * dirichlet(u, size)
}

/// Cosine-window filter `F(q) = (G(q - 1/2) + G(q + 1/2)) / sqrt 2`, real and even.
pub fn filter_cosine(q: f64, m: u32) -> C64 {
    let size = check_m(m);
    if m == 1 {
        return C64::new(FRAC_1_SQRT_2, 0.0);
    }
    let u = reduce_offset(q, size).abs();
    // cos(pi u) = -sin(pi (u - 1/2)) folds the zero at u = 1/2 into D.
    let value = sinpi(1.0 / size) * dirichlet(u - 0.5, size)
        / (std::f64::consts::SQRT_2 * sinpi((u + 0.5) / size));
    C64::new(value, 0.0)
}

/// Binned cosine filter `F+(q) = (F(q - 1/2) + F(q + 1/2)) / sqrt 2`, real and even.
pub fn filter_cosine_plus(q: f64, m: u32) -> C64 {
    let size = check_m(m);
    if m == 1 {
        return C64::new(1.0, 0.0);
    }
    let u = reduce_offset(q, size).abs();
    let s = sinpi(1.0 / size);
    let value = if u < 0.5 {
        s * s * cospi(u / size) * dirichlet(u, size)
            / (sinpi((1.0 - u) / size) * sinpi((1.0 + u) / size))
    } else {
        s * s * cospi(u / size) * dirichlet(1.0 - u, size)
            / (sinpi(u / size) * sinpi((1.0 + u) / size))
    };
    C64::new(value, 0.0)
}

/// QPE outcome filter for a window: `G` or `F`.
pub fn filter(kind: WindowKind, q: f64, m: u32) -> C64 {
    match kind {
        WindowKind::Rectangular => filter_rect(q, m),
        WindowKind::Cosine => filter_cosine(q, m),
    }
}

/// State-preparation filter for a window: `G` or the binned `F+`.
pub fn prep_filter(kind: WindowKind, q: f64, m: u32) -> C64 {
    match kind {
        WindowKind::Rectangular => filter_rect(q, m),
        WindowKind::Cosine => filter_cosine_plus(q, m),
    }
}

/// `1 / (2|q|)`, an upper bound on `|G(q)|` for `0 < |q| <= 2^(m-1)`.
pub fn bound_rect_tail(q: f64, m: u32) -> Result<f64> {
    let size = check_m(m);
    if q == 0.0 {
        return Err(Error::BoundSingular { q });
    }
    if q.abs() > size / 2.0 {
        return Err(Error::InvalidParameter(format!("|q| = {} exceeds 2^(m-1) = {}", q.abs(), size / 2.0)));
    }
    Ok(1.0 / (2.0 * q.abs()))
}

/// `pi^2 / (8 |q| |q-1| |q+1|)`, an upper bound on `|F+(q)|` when
/// `1 + |q| <= 2^(m-1)`.
pub fn bound_cosine_plus_tail(q: f64) -> Result<f64> {
    let a = q.abs();
    let denom = 8.0 * a * (a - 1.0).abs() * (a + 1.0);
    if denom == 0.0 {
        return Err(Error::BoundSingular { q });
    }
    Ok(PI * PI / denom)
}

/// `pi^2 / (48 (k-2)^3)` with `k = 2^(p-1)`: cap on the cosine error rate.
pub fn cosine_error_tail_bound(p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::TailBoundRange { k: 0 });
    }
    let k = 1u64 << (p - 1);
    if k <= 2 {
        return Err(Error::TailBoundRange { k });
    }
    let d = (k - 2) as f64;
    Ok(PI * PI / (48.0 * d * d * d))
}
