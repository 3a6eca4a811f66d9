use crate::{Error, Scalar};

/// One ℓ1 weight per constraint class.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyWeights<T> {
    pub beta: Vec<T>,
}

impl<T: Scalar> PenaltyWeights<T> {
    pub fn new(beta: Vec<T>) -> Result<Self, Error> {
        if beta.iter().any(|&b| !(b > T::zero()) || !b.is_finite()) {
            return Err(Error::Invalid("penalty weights must be positive and finite".into()));
        }
        Ok(PenaltyWeights { beta })
    }

    pub fn uniform(classes: usize, beta: T) -> Self {
        PenaltyWeights { beta: vec![beta; classes] }
    }

    pub fn max(&self) -> T {
        self.beta.iter().fold(T::zero(), |m, &b| m.max(b))
    }

    pub fn doubled(&self) -> Self {
        PenaltyWeights { beta: self.beta.iter().map(|&b| b + b).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Keep `L` as given; a failed acceptance test is recorded but the step is
    /// taken.
    Fixed,
    /// `L ← (L + U)/2` with `U = β·L_Ψ`, snapping to `U` once within 5% of it
    /// and doubling beyond.
    Bisection,
    /// `L ← μ·L`.
    Geometric { mu: f64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Fixed => "fixed",
            Strategy::Bisection => "bisection",
            Strategy::Geometric { .. } => "geometric",
        }
    }
}

/// Per-slice proximal weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RegParams<T> {
    pub l: Vec<T>,
    pub l_min: Vec<T>,
    pub strategy: Strategy,
    /// Keep the accepted `L` for the next outer iteration instead of
    /// restarting from `l_min`.
    pub carry_over: bool,
}

impl<T: Scalar> RegParams<T> {
    pub fn new(l_min: Vec<T>, strategy: Strategy, carry_over: bool) -> Result<Self, Error> {
        let r = RegParams { l: l_min.clone(), l_min, strategy, carry_over };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.l.len() != self.l_min.len() {
            return Err(Error::Dimension("L and L_min differ in length".into()));
        }
        if self.l_min.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::Invalid("L_min must be positive".into()));
        }
        if self.l.iter().zip(&self.l_min).any(|(l, m)| l < m) {
            return Err(Error::Invalid("L below L_min".into()));
        }
        if let Strategy::Geometric { mu } = self.strategy {
            if !(mu > 1.0) {
                return Err(Error::Invalid("geometric factor must exceed 1".into()));
            }
        }
        Ok(())
    }

    pub fn smallest_min(&self) -> T {
        self.l_min.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    /// Next trial value of slice `s` given the upper reference `u = β·L_Ψ`.
    pub fn bumped(&self, s: usize, u: Option<T>) -> T {
        let l = self.l[s];
        match self.strategy {
            Strategy::Fixed => l,
            Strategy::Geometric { mu } => l * T::of(mu),
            Strategy::Bisection => match u {
                Some(u) if l < u * T::of(0.95) => T::of(0.5) * (l + u),
                Some(u) if l < u => u,
                _ => l + l,
            },
        }
    }
}
