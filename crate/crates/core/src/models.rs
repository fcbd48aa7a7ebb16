//! Closed-loop templates and their per-frequency state-space symbols.
//!
//! State orderings are `(x)`, `(z, x)`, `(x, v)` and `(z, x, v)`: `z` is
//! the controller memory, `x` the position (the measured output) and `v` the
//! velocity. Noise always enters the last state.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{nearest_neighbor, LocalArray, MultiIndex};
use crate::small::SymbolMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `x' = F x + w`
    ConsensusStatic,
    /// `z' = A z + B x`, `x' = z + F x + w`
    ConsensusDynamic,
    /// `x'' = F x + G x' + w`
    VehicularStatic,
    /// `z' = A z + B x + C v`, `v' = z + F x + G v + w`
    VehicularDynamic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::ConsensusStatic,
        ModelKind::ConsensusDynamic,
        ModelKind::VehicularStatic,
        ModelKind::VehicularDynamic,
    ];

    /// Per-coordinate state dimension of the symbol.
    pub fn state_dim(self) -> usize {
        match self {
            ModelKind::ConsensusStatic => 1,
            ModelKind::ConsensusDynamic | ModelKind::VehicularStatic => 2,
            ModelKind::VehicularDynamic => 3,
        }
    }

    pub fn required(self) -> &'static [Role] {
        match self {
            ModelKind::ConsensusStatic => &[Role::F],
            ModelKind::ConsensusDynamic => &[Role::A, Role::B, Role::F],
            ModelKind::VehicularStatic => &[Role::F, Role::G],
            ModelKind::VehicularDynamic => &[Role::A, Role::B, Role::C, Role::F, Role::G],
        }
    }

    pub fn is_vehicular(self) -> bool {
        matches!(self, ModelKind::VehicularStatic | ModelKind::VehicularDynamic)
    }

    /// Index of the position state in the symbol.
    pub fn position_index(self) -> usize {
        match self {
            ModelKind::ConsensusStatic | ModelKind::VehicularStatic => 0,
            ModelKind::ConsensusDynamic | ModelKind::VehicularDynamic => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ConsensusStatic => "consensus_static",
            ModelKind::ConsensusDynamic => "consensus_dynamic",
            ModelKind::VehicularStatic => "vehicular_static",
            ModelKind::VehicularDynamic => "vehicular_dynamic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which feedback operator an array plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    A,
    B,
    C,
    F,
    G,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::A, Role::B, Role::C, Role::F, Role::G];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::A => "A",
            Role::B => "B",
            Role::C => "C",
            Role::F => "F",
            Role::G => "G",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityFeedback {
    Relative,
    Absolute,
}

/// The five families the closed forms and scaling laws distinguish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    ConsensusStatic,
    ConsensusDynamic,
    VehicularStatic,
    VehicularDynamicRelative,
    /// Absolute velocity feedback in the memory loop, as in distributed-averaging PI.
    VehicularDynamicAbsolute,
}

impl Template {
    pub const ALL: [Template; 5] = [
        Template::ConsensusStatic,
        Template::ConsensusDynamic,
        Template::VehicularStatic,
        Template::VehicularDynamicRelative,
        Template::VehicularDynamicAbsolute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::ConsensusStatic => "consensus_static",
            Template::ConsensusDynamic => "consensus_dynamic",
            Template::VehicularStatic => "vehicular_static",
            Template::VehicularDynamicRelative => "vehicular_dynamic_relative",
            Template::VehicularDynamicAbsolute => "vehicular_dynamic_absolute",
        }
    }
}

/// Optional arrays by role, the raw input to [`ModelSpec::from_parts`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Operators {
    pub a: Option<LocalArray>,
    pub b: Option<LocalArray>,
    pub c: Option<LocalArray>,
    pub f: Option<LocalArray>,
    pub g: Option<LocalArray>,
}

impl Operators {
    pub fn get(&self, role: Role) -> Option<&LocalArray> {
        match role {
            Role::A => self.a.as_ref(),
            Role::B => self.b.as_ref(),
            Role::C => self.c.as_ref(),
            Role::F => self.f.as_ref(),
            Role::G => self.g.as_ref(),
        }
    }

    pub fn set(&mut self, role: Role, array: LocalArray) {
        let slot = match role {
            Role::A => &mut self.a,
            Role::B => &mut self.b,
            Role::C => &mut self.c,
            Role::F => &mut self.f,
            Role::G => &mut self.g,
        };
        *slot = Some(array);
    }
}

/// A validated closed-loop model. Arrays not used by the kind are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    dim: usize,
    a: LocalArray,
    b: LocalArray,
    c: LocalArray,
    f: LocalArray,
    g: LocalArray,
    velocity: VelocityFeedback,
    checked: bool,
}

impl ModelSpec {
    pub fn consensus_static(f: LocalArray) -> Result<Self> {
        let ops = Operators {
            f: Some(f),
            ..Default::default()
        };
        Self::from_parts(ModelKind::ConsensusStatic, ops, None)
    }

    pub fn consensus_dynamic(a: LocalArray, b: LocalArray, f: LocalArray) -> Result<Self> {
        let ops = Operators {
            a: Some(a),
            b: Some(b),
            f: Some(f),
            ..Default::default()
        };
        Self::from_parts(ModelKind::ConsensusDynamic, ops, None)
    }

    pub fn vehicular_static(f: LocalArray, g: LocalArray) -> Result<Self> {
        let ops = Operators {
            f: Some(f),
            g: Some(g),
            ..Default::default()
        };
        Self::from_parts(ModelKind::VehicularStatic, ops, None)
    }

    pub fn vehicular_dynamic(
        a: LocalArray,
        b: LocalArray,
        c: LocalArray,
        f: LocalArray,
        g: LocalArray,
    ) -> Result<Self> {
        let ops = Operators {
            a: Some(a),
            b: Some(b),
            c: Some(c),
            f: Some(f),
            g: Some(g),
        };
        Self::from_parts(ModelKind::VehicularDynamic, ops, None)
    }

    /// Builds and validates a model.
    ///
    /// Every array the kind uses must be present (a zero array is fine) and
    /// all must share one dimension. `F` and, for dynamic kinds, `B` must
    /// have zero entry sum. Vehicular arrays must be symmetric, as must `F`
    /// in dynamic consensus. If `velocity` is given it has to agree with the
    /// entry sums of `G` and `C`.
    pub fn from_parts(kind: ModelKind, ops: Operators, velocity: Option<VelocityFeedback>) -> Result<Self> {
        let model = Self::assemble(kind, ops, true)?;
        model.validate()?;
        if let Some(v) = velocity {
            if v != model.velocity {
                return Err(Error::InvalidArgument(alloc::format!(
                    "velocity feedback declared {v:?} but G and C give {:?}",
                    model.velocity
                )));
            }
        }
        Ok(model)
    }

    /// Like [`from_parts`](Self::from_parts) but skips the sign, sum and
    /// symmetry assumptions. Used to explore inadmissible or asymmetric
    /// laws; closed forms refuse such models.
    pub fn unchecked(kind: ModelKind, ops: Operators) -> Result<Self> {
        Self::assemble(kind, ops, false)
    }

    fn assemble(kind: ModelKind, mut ops: Operators, checked: bool) -> Result<Self> {
        for &role in kind.required() {
            if ops.get(role).is_none() {
                return Err(Error::MissingArray { kind, role });
            }
        }
        let dim = ops.get(kind.required()[0]).map(LocalArray::dim).unwrap_or(1);
        for role in Role::ALL {
            if let Some(arr) = ops.get(role) {
                if arr.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: arr.dim(),
                    });
                }
                if !kind.required().contains(&role) && !arr.is_zero() {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "{kind} model does not use operator {role}"
                    )));
                }
            }
        }
        let mut take = |r: Role| -> LocalArray {
            let slot = match r {
                Role::A => ops.a.take(),
                Role::B => ops.b.take(),
                Role::C => ops.c.take(),
                Role::F => ops.f.take(),
                Role::G => ops.g.take(),
            };
            slot.unwrap_or_else(|| LocalArray::zero(dim))
        };
        let (a, b, c, f, g) = (
            take(Role::A),
            take(Role::B),
            take(Role::C),
            take(Role::F),
            take(Role::G),
        );
        let velocity = if g.is_relative() && c.is_relative() {
            VelocityFeedback::Relative
        } else {
            VelocityFeedback::Absolute
        };
        Ok(ModelSpec {
            kind,
            dim,
            a,
            b,
            c,
            f,
            g,
            velocity,
            checked,
        })
    }

    fn validate(&self) -> Result<()> {
        if !self.f.is_relative() {
            return Err(Error::AssumptionViolated {
                role: Role::F,
                property: "relative (entries must sum to zero)",
            });
        }
        let dynamic = matches!(self.kind, ModelKind::ConsensusDynamic | ModelKind::VehicularDynamic);
        if dynamic && !self.b.is_relative() {
            return Err(Error::AssumptionViolated {
                role: Role::B,
                property: "relative (entries must sum to zero)",
            });
        }
        let must_be_symmetric: &[Role] = match self.kind {
            ModelKind::ConsensusStatic => &[],
            ModelKind::ConsensusDynamic => &[Role::F],
            _ => self.kind.required(),
        };
        for &role in must_be_symmetric {
            if !self.array(role).is_symmetric() {
                return Err(Error::AssumptionViolated {
                    role,
                    property: "symmetric",
                });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn velocity_feedback(&self) -> VelocityFeedback {
        self.velocity
    }

    /// Whether the modelling assumptions were enforced at construction.
    pub fn is_checked(&self) -> bool {
        self.checked
    }

    pub fn array(&self, role: Role) -> &LocalArray {
        match role {
            Role::A => &self.a,
            Role::B => &self.b,
            Role::C => &self.c,
            Role::F => &self.f,
            Role::G => &self.g,
        }
    }

    /// The arrays this kind uses, in `A, B, C, F, G` order.
    pub fn used_arrays(&self) -> impl Iterator<Item = (Role, &LocalArray)> {
        self.kind.required().iter().map(move |&r| (r, self.array(r)))
    }

    /// Largest support radius over all arrays.
    pub fn support_radius(&self) -> usize {
        self.used_arrays().map(|(_, a)| a.support_radius()).max().unwrap_or(0)
    }

    /// Smallest lattice side on which every array is well defined.
    pub fn min_lattice(&self) -> usize {
        2 * self.support_radius() + 1
    }

    pub fn is_symmetric(&self) -> bool {
        self.used_arrays().all(|(_, a)| a.is_symmetric())
    }

    pub fn template(&self) -> Template {
        match self.kind {
            ModelKind::ConsensusStatic => Template::ConsensusStatic,
            ModelKind::ConsensusDynamic => Template::ConsensusDynamic,
            ModelKind::VehicularStatic => Template::VehicularStatic,
            ModelKind::VehicularDynamic => match self.velocity {
                VelocityFeedback::Relative => Template::VehicularDynamicRelative,
                VelocityFeedback::Absolute => Template::VehicularDynamicAbsolute,
            },
        }
    }

    /// `max(||f||_inf, ||g||_inf)`.
    pub fn beta(&self) -> f64 {
        self.f.max_abs().max(self.g.max_abs())
    }

    /// Multiplies every array by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.a = self.a.scaled(c);
        out.b = self.b.scaled(c);
        out.c = self.c.scaled(c);
        out.f = self.f.scaled(c);
        out.g = self.g.scaled(c);
        out
    }

    /// Symbols on the unit torus at `theta`.
    pub fn symbols_at(&self, theta: &[f64]) -> Result<Symbols> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: theta.len(),
            });
        }
        let z = |arr: &LocalArray| arr.z_symbol(theta);
        Ok(Symbols {
            a: z(&self.a),
            b: z(&self.b),
            c: z(&self.c),
            f: z(&self.f),
            g: z(&self.g),
        })
    }

    /// Symbols at wavenumber `n` on `Z_L^d`.
    pub fn symbols_dft(&self, n: &MultiIndex, l: usize) -> Result<Symbols> {
        if l < self.min_lattice() {
            return Err(Error::LatticeTooSmall {
                l,
                q: self.support_radius(),
                min: self.min_lattice(),
            });
        }
        Ok(Symbols {
            a: self.a.dft_symbol(n, l)?,
            b: self.b.dft_symbol(n, l)?,
            c: self.c.dft_symbol(n, l)?,
            f: self.f.dft_symbol(n, l)?,
            g: self.g.dft_symbol(n, l)?,
        })
    }

    /// The state-space symbol at `theta`; the output row vanishes at `theta = 0`.
    pub fn assemble_symbol(&self, theta: &[f64]) -> Result<StateSpaceSymbol> {
        let s = self.symbols_at(theta)?;
        let observed = theta.iter().any(|&t| t != 0.0);
        Ok(self.symbol_from(&s, theta.to_vec(), observed))
    }

    /// The state-space symbol at wavenumber `n` of `Z_L^d`.
    pub fn assemble_wavenumber(&self, n: &MultiIndex, l: usize) -> Result<StateSpaceSymbol> {
        let n = n.reduce(l);
        let s = self.symbols_dft(&n, l)?;
        Ok(self.symbol_from(&s, n.to_theta(l), !n.is_zero()))
    }

    pub(crate) fn symbol_from(&self, s: &Symbols, theta: Vec<f64>, observed: bool) -> StateSpaceSymbol {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let a_hat = match self.kind {
            ModelKind::ConsensusStatic => SymbolMatrix::from_rows([[s.f]]),
            ModelKind::ConsensusDynamic => SymbolMatrix::from_rows([[s.a, s.b], [one, s.f]]),
            ModelKind::VehicularStatic => SymbolMatrix::from_rows([[zero, one], [s.f, s.g]]),
            ModelKind::VehicularDynamic => {
                SymbolMatrix::from_rows([[s.a, s.b, s.c], [zero, zero, one], [one, s.f, s.g]])
            }
        };
        let m = self.kind.state_dim();
        let mut b_hat = [0.0; 3];
        b_hat[m - 1] = 1.0;
        let mut c_hat = [0.0; 3];
        if observed {
            c_hat[self.kind.position_index()] = 1.0;
        }
        StateSpaceSymbol {
            theta,
            a_hat,
            b_hat,
            c_hat,
        }
    }
}

/// Fourier symbols of the five operators at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symbols {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub f: Complex64,
    pub g: Complex64,
}

/// `(A_hat, B_hat, C_hat)` at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSymbol {
    pub theta: Vec<f64>,
    pub a_hat: SymbolMatrix,
    /// Disturbance input column; only the first `m` entries are meaningful.
    pub b_hat: [f64; 3],
    /// Output row selecting the position state, zero at the origin.
    pub c_hat: [f64; 3],
}

impl StateSpaceSymbol {
    pub fn dim(&self) -> usize {
        self.a_hat.dim()
    }
}

/// Distributed-averaging PI controller on a ring:
/// `F = f_+ {1, -2, 1}`, `G = {-g_o}`, `A = a_+ {1, -2, 1}`, `C = {-c_o}`, `B = 0`.
pub fn dapi_model(f_plus: f64, g_o: f64, a_plus: f64, c_o: f64) -> Result<ModelSpec> {
    for (name, v) in [("f_plus", f_plus), ("g_o", g_o), ("a_plus", a_plus), ("c_o", c_o)] {
        if !(v > 0.0) {
            return Err(Error::NonPositive { name, value: v });
        }
    }
    decentralized_pi(f_plus, g_o, a_plus, c_o)
}

/// [`dapi_model`] without the positivity check, so `a_plus = 0` (the
/// purely decentralized integrator) can be built and shown inadmissible.
pub fn decentralized_pi(f_plus: f64, g_o: f64, a_plus: f64, c_o: f64) -> Result<ModelSpec> {
    ModelSpec::vehicular_dynamic(
        nearest_neighbor(1, a_plus)?,
        LocalArray::zero(1),
        LocalArray::scalar(1, -c_o),
        nearest_neighbor(1, f_plus)?,
        LocalArray::scalar(1, -g_o),
    )
}

/// Look-ahead/look-behind platoon controller
/// `u_k = f_+(x_{k+1} - x_k) + f_-(x_{k-1} - x_k) + g_+(v_{k+1} - v_k) + g_-(v_{k-1} - v_k) - g_o v_k`.
///
/// Only symmetric gains are accepted.
pub fn lookahead_model(f_plus: f64, f_minus: f64, g_plus: f64, g_minus: f64, g_o: f64) -> Result<ModelSpec> {
    for (name, v) in [
        ("f_plus", f_plus),
        ("f_minus", f_minus),
        ("g_plus", g_plus),
        ("g_minus", g_minus),
        ("g_o", g_o),
    ] {
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "{name} must be non-negative, got {v}"
            )));
        }
    }
    if f_plus != f_minus {
        return Err(Error::AssumptionViolated {
            role: Role::F,
            property: "symmetric (look-ahead and look-behind gains must match)",
        });
    }
    if g_plus != g_minus {
        return Err(Error::AssumptionViolated {
            role: Role::G,
            property: "symmetric (look-ahead and look-behind gains must match)",
        });
    }
    let f = LocalArray::from_1d(&[(-1, f_minus), (0, -f_plus - f_minus), (1, f_plus)])?;
    let g = LocalArray::from_1d(&[(-1, g_minus), (0, -g_plus - g_minus - g_o), (1, g_plus)])?;
    ModelSpec::vehicular_static(f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::standard_consensus_array;
    use core::f64::consts::PI;

    #[test]
    fn consensus_static_symbol() {
        let m = ModelSpec::consensus_static(standard_consensus_array(1, 1.0).unwrap()).unwrap();
        let s = m.assemble_symbol(&[PI]).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.a_hat.get(0, 0).re + 4.0).abs() < 1e-15);
        assert_eq!(s.c_hat[0], 1.0);
        assert_eq!(m.assemble_symbol(&[0.0]).unwrap().c_hat[0], 0.0);
    }

    #[test]
    fn vehicular_static_layout() {
        let f = standard_consensus_array(1, 1.0).unwrap();
        let g = standard_consensus_array(1, 0.5).unwrap();
        let m = ModelSpec::vehicular_static(f.clone(), g.clone()).unwrap();
        let t = [0.7];
        let s = m.assemble_symbol(&t).unwrap();
        assert_eq!(s.a_hat.get(0, 0).re, 0.0);
        assert_eq!(s.a_hat.get(0, 1).re, 1.0);
        assert_eq!(s.a_hat.get(1, 0), f.z_symbol(&t));
        assert_eq!(s.a_hat.get(1, 1), g.z_symbol(&t));
        assert_eq!(&s.b_hat[..2], &[0.0, 1.0]);
        assert_eq!(&s.c_hat[..2], &[1.0, 0.0]);
    }

    #[test]
    fn dapi_at_origin() {
        let m = dapi_model(1.0, 1.0, 1.0, 1.0).unwrap();
        let s = m.assemble_symbol(&[0.0]).unwrap();
        let row = |i: usize| [s.a_hat.get(i, 0).re, s.a_hat.get(i, 1).re, s.a_hat.get(i, 2).re];
        assert_eq!(row(0), [0.0, 0.0, -1.0]);
        assert_eq!(row(1), [0.0, 0.0, 1.0]);
        assert_eq!(row(2), [1.0, 0.0, -1.0]);
        assert_eq!(m.velocity_feedback(), VelocityFeedback::Absolute);
        assert_eq!(m.template(), Template::VehicularDynamicAbsolute);
    }

    #[test]
    fn dapi_arrays() {
        let m = dapi_model(1.0, 1.0, 1.0, 1.0).unwrap();
        let nn = LocalArray::from_1d(&[(-1, 1.0), (0, -2.0), (1, 1.0)]).unwrap();
        assert_eq!(m.array(Role::F), &nn);
        assert_eq!(m.array(Role::A), &nn);
        assert_eq!(m.array(Role::G), &LocalArray::scalar(1, -1.0));
        assert_eq!(m.array(Role::C), &LocalArray::scalar(1, -1.0));
        assert!(m.array(Role::B).is_zero());
        assert!(dapi_model(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(decentralized_pi(1.0, 1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn lookahead_variants() {
        let rel = lookahead_model(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(rel.velocity_feedback(), VelocityFeedback::Relative);
        let abs = lookahead_model(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(abs.array(Role::G), &LocalArray::scalar(1, -1.0));
        assert_eq!(abs.velocity_feedback(), VelocityFeedback::Absolute);
        let mixed = lookahead_model(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert!((mixed.array(Role::G).sum() + 0.5).abs() < 1e-15);
        assert_eq!(mixed.velocity_feedback(), VelocityFeedback::Absolute);
        assert!(matches!(
            lookahead_model(1.0, 0.5, 1.0, 1.0, 0.0),
            Err(Error::AssumptionViolated { role: Role::F, .. })
        ));
    }

    #[test]
    fn validation_errors() {
        let f = standard_consensus_array(1, 1.0).unwrap();
        let missing = ModelSpec::from_parts(
            ModelKind::ConsensusDynamic,
            Operators {
                f: Some(f.clone()),
                a: Some(LocalArray::zero(1)),
                ..Default::default()
            },
            None,
        );
        assert_eq!(
            missing.unwrap_err(),
            Error::MissingArray {
                kind: ModelKind::ConsensusDynamic,
                role: Role::B
            }
        );
        assert!(ModelSpec::consensus_static(LocalArray::scalar(1, -1.0)).is_err());
        let asym = LocalArray::from_1d(&[(-1, 0.3), (0, -1.0), (1, 0.7)]).unwrap();
        assert!(ModelSpec::consensus_static(asym.clone()).is_ok());
        assert!(ModelSpec::consensus_dynamic(LocalArray::zero(1), LocalArray::zero(1), asym.clone()).is_err());
        assert!(ModelSpec::vehicular_static(f.clone(), asym).is_err());
        let declared = ModelSpec::from_parts(
            ModelKind::VehicularStatic,
            Operators {
                f: Some(f.clone()),
                g: Some(f),
                ..Default::default()
            },
            Some(VelocityFeedback::Absolute),
        );
        assert!(declared.is_err());
    }

    #[test]
    fn conjugate_symmetry_of_symbol() {
        let asym = LocalArray::from_1d(&[(-1, 0.3), (0, -1.0), (1, 0.7)]).unwrap();
        let m = ModelSpec::consensus_dynamic(
            LocalArray::scalar(1, -1.0),
            asym,
            standard_consensus_array(1, 1.0).unwrap(),
        )
        .unwrap();
        let p = m.assemble_symbol(&[0.4]).unwrap();
        let n = m.assemble_symbol(&[-0.4]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.a_hat.get(i, j) - n.a_hat.get(i, j).conj()).norm() < 1e-15);
            }
        }
    }
}
