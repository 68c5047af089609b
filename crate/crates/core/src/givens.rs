/// A symmetric Givens reflection `[[c, s], [s, −c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensPair {
    pub c: f64,
    pub s: f64,
}

impl GivensPair {
    pub const IDENTITY: GivensPair = GivensPair { c: 1.0, s: 0.0 };

    /// `(c·a + s·b, s·a − c·b)`
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> (f64, f64) {
        (self.c * a + self.s * b, self.s * a - self.c * b)
    }

    /// `|c² + s² − 1|`
    pub fn orthogonality_defect(self) -> f64 {
        (self.c * self.c + self.s * self.s - 1.0).abs()
    }
}

/// Builds the reflection mapping `(a, b)` to `(r, 0)` with `r = √(a² + b²) ≥ 0`.
///
/// `c = a/r`, `s = b/r`, and `(0, 0)` gives `(c, s, r) = (1, 0, 0)`.
///
/// ```
/// use sqd_krylov::sym_givens;
///
/// let (g, r) = sym_givens(3.0, 4.0);
/// assert_eq!((g.c, g.s, r), (0.6, 0.8, 5.0));
/// let (x, y) = g.apply(3.0, 4.0);
/// assert!((x - 5.0).abs() < 1e-15 && y.abs() < 1e-15);
/// ```
pub fn sym_givens(a: f64, b: f64) -> (GivensPair, f64) {
    if b == 0.0 {
        if a == 0.0 {
            return (GivensPair::IDENTITY, 0.0);
        }
        return (GivensPair { c: a.signum(), s: 0.0 }, a.abs());
    }
    if a == 0.0 {
        return (GivensPair { c: 0.0, s: b.signum() }, b.abs());
    }
    let r = a.hypot(b);
    if r.is_finite() {
        return (GivensPair { c: a / r, s: b / r }, r);
    }
    // r overflowed: take c and s from the ratio of the smaller entry to the
    // larger one.
    if a.abs() >= b.abs() {
        let t = b / a;
        let h = t.hypot(1.0);
        let c = a.signum() / h;
        (GivensPair { c, s: c * t }, a.abs() * h)
    } else {
        let t = a / b;
        let h = t.hypot(1.0);
        let s = b.signum() / h;
        (GivensPair { c: s * t, s }, b.abs() * h)
    }
}
