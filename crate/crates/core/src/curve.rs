/// A planar curve `t ↦ (φ₁(t), φ₂(t))` on `[0, 1]` with an analytic
/// derivative. Drives the Bishop frame system.
pub trait PlaneCurve {
    fn value(&self, t: f64) -> [f64; 2];
    fn derivative(&self, t: f64) -> [f64; 2];

    /// Norm of the data point the curve was built from, if any.
    fn source_norm(&self) -> Option<f64> {
        None
    }
}

impl<C: PlaneCurve + ?Sized> PlaneCurve for &C {
    fn value(&self, t: f64) -> [f64; 2] {
        (**self).value(t)
    }

    fn derivative(&self, t: f64) -> [f64; 2] {
        (**self).derivative(t)
    }

    fn source_norm(&self) -> Option<f64> {
        (**self).source_norm()
    }
}

/// `φ(t) = (a, b)` for all `t`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurve(pub [f64; 2]);

impl PlaneCurve for ConstantCurve {
    fn value(&self, _t: f64) -> [f64; 2] {
        self.0
    }

    fn derivative(&self, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// `φ(t) = κ (cos ωt, sin ωt)`: the Bishop data of a circular helix with
/// curvature `κ` and torsion `ω`.
#[derive(Debug, Clone, Copy)]
pub struct HelixCurve {
    pub curvature: f64,
    pub twist: f64,
}

impl PlaneCurve for HelixCurve {
    fn value(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.twist * t).sin_cos();
        [self.curvature * c, self.curvature * s]
    }

    fn derivative(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.twist * t).sin_cos();
        let k = self.curvature * self.twist;
        [-k * s, k * c]
    }
}
