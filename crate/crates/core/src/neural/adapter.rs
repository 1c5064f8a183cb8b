//! The trained network exposed as a distance field plus medial field, so the
//! tracer, proxy generator and shading run on it unchanged.

use super::net::MlpParams;
use crate::error::{Error, Result};
use crate::field::{DistanceField, GRAD_UNDEFINED_EPS};
use crate::math::{Aabb, Vector};
use crate::medial::MedialField;

pub struct NeuralField<const D: usize> {
    params: MlpParams,
    bounds: Aabb<D>,
}

impl<const D: usize> NeuralField<D> {
    pub fn new(params: MlpParams, bounds: Aabb<D>) -> Result<Self> {
        if params.cfg.dim != D {
            return Err(Error::Format(format!(
                "checkpoint dim {} does not match scene dim {D}",
                params.cfg.dim
            )));
        }
        Ok(NeuralField { params, bounds })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }
}

impl<const D: usize> DistanceField<D> for NeuralField<D> {
    fn phi(&self, x: Vector<D>) -> f64 {
        self.params.forward_phi(x.as_slice())
    }

    /// Gradient head renormalized to unit length, with reverse-mode input
    /// differentiation as the fallback where the head output collapses.
    fn grad(&self, x: Vector<D>) -> Result<Vector<D>> {
        let out = self.params.forward(x.as_slice());
        let head = Vector::<D>::from_slice(&out.grad);
        if let Some(unit) = head.normalized(GRAD_UNDEFINED_EPS) {
            return Ok(unit);
        }
        let exact = Vector::<D>::from_slice(&self.params.input_gradient(x.as_slice()));
        exact
            .normalized(GRAD_UNDEFINED_EPS)
            .ok_or(Error::GradientUndefined)
    }

    fn bounds(&self) -> Aabb<D> {
        self.bounds
    }
}

impl<const D: usize> MedialField<D> for NeuralField<D> {
    fn mf(&self, x: Vector<D>) -> Result<f64> {
        Ok(self.params.forward(x.as_slice()).mf_selected())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec2;
    use crate::neural::net::{init_network, NetConfig};

    fn field() -> NeuralField<2> {
        let cfg = NetConfig {
            dim: 2,
            fourier_bands: 3,
            fourier_alpha: 1e-3,
            fourier_freq_scale: 2.0,
            backbone_layers: 2,
            backbone_width: 8,
            head_width: 6,
            softplus_beta: 100.0,
            geo_radius: 1.0,
        };
        NeuralField::new(init_network(31, &cfg), Aabb::centered(1.5)).unwrap()
    }

    #[test]
    fn adapter_phi_equals_forward() {
        let f = field();
        let x = Vec2::new(0.4, -0.3);
        assert_eq!(f.phi(x), f.params().forward(x.as_slice()).phi);
    }

    #[test]
    fn adapter_grad_is_unit() {
        let f = field();
        let g = f.grad(Vec2::new(0.7, 0.2)).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adapter_mf_follows_selection() {
        let f = field();
        let x = Vec2::new(0.25, 0.9);
        let out = f.params().forward(x.as_slice());
        assert_eq!(f.mf(x).unwrap(), out.mf_selected());
    }

    #[test]
    fn dim_mismatch_rejected() {
        let cfg = NetConfig {
            dim: 3,
            fourier_bands: 2,
            fourier_alpha: 1e-3,
            fourier_freq_scale: 2.0,
            backbone_layers: 1,
            backbone_width: 4,
            head_width: 4,
            softplus_beta: 100.0,
            geo_radius: 1.0,
        };
        let r = NeuralField::<2>::new(init_network(1, &cfg), Aabb::centered(1.0));
        assert!(r.is_err());
    }
}
