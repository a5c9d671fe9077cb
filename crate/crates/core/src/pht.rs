//! Poisson hyperplane tessellations restricted to a window.

use serde::Serialize;

use crate::error::{Result, StitError};
use crate::geometry::{hits, ConvexBody, Hyperplane, Polytope, Side, AREA_EPS};
use crate::measure::DrivingMeasure;
use crate::rng::RandomStream;
use crate::stit::check_regime;
use crate::tessellation::Tessellation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonHyperplanePattern {
    pub window: Polytope,
    pub rho: f64,
    pub hyperplanes: Vec<Hyperplane>,
}

/// `N ~ Poisson(ρ Λ([W]))` hyperplanes drawn i.i.d. from `Λ^W`.
pub fn simulate_pht(
    measure: &DrivingMeasure,
    rho: f64,
    window: &Polytope,
    rng: &mut RandomStream,
) -> Result<PoissonHyperplanePattern> {
    check_regime(measure, window)?;
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(StitError::InvalidParameter(format!(
            "rho must be non-negative, got {rho}"
        )));
    }
    let n = rng.poisson(rho * measure.hitting(window)?);
    let hyperplanes = (0..n)
        .map(|_| measure.sample_hitting(window, rng))
        .collect::<Result<_>>()?;
    Ok(PoissonHyperplanePattern {
        window: window.clone(),
        rho,
        hyperplanes,
    })
}

/// `P(no hyperplane hits C) = e^{-ρ Λ([C])}`.
pub fn empty_probability<B: ConvexBody + ?Sized>(measure: &DrivingMeasure, rho: f64, body: &B) -> Result<f64> {
    Ok((-rho * measure.hitting(body)?).exp())
}

impl PoissonHyperplanePattern {
    /// True iff some hyperplane of the pattern hits `body`.
    pub fn hits_body<B: ConvexBody + ?Sized>(&self, body: &B) -> bool {
        self.hyperplanes.iter().any(|h| hits(h, body))
    }

    /// Cells of the arrangement inside the window.
    pub fn cells(&self) -> Tessellation {
        let mut cells = vec![self.window.clone()];
        for h in &self.hyperplanes {
            let mut next = Vec::with_capacity(cells.len() + 1);
            for c in cells {
                if !hits(h, &c) {
                    next.push(c);
                    continue;
                }
                for side in [Side::Plus, Side::Minus] {
                    if let Some(piece) = c.clip_lenient(&h.half_space(side)) {
                        if piece.volume() > AREA_EPS {
                            next.push(piece);
                        }
                    }
                }
            }
            cells = next;
        }
        Tessellation {
            window: self.window.clone(),
            cells,
        }
    }
}

/// The event that some hyperplane hits the body `ball`.
pub fn tail_event_hits_ball<B: ConvexBody + ?Sized>(pattern: &PoissonHyperplanePattern, ball: &B) -> bool {
    pattern.hits_body(ball)
}
