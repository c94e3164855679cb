use serde::{Deserialize, Serialize};

/// How same-level overlaps are turned into planar forces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionMode {
    /// Minimum translation vector from the separating-axis test.
    #[default]
    Sat,
    /// Overlap area along the centroid line.
    Area,
}

impl std::str::FromStr for CollisionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sat" => Ok(CollisionMode::Sat),
            "area" => Ok(CollisionMode::Area),
            other => Err(format!("unknown collision mode `{other}` (expected sat|area)")),
        }
    }
}

/// Every weight, step size and threshold of the optimizer.
///
/// `Default` carries the tuned values; fields missing from a params file
/// fall back to them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerParams {
    pub w_col: f64,
    pub w_vcol: f64,
    pub w_bnd: f64,
    pub w_sup: f64,
    pub w_adj: f64,
    pub w_wall: f64,
    pub w_pnt: f64,
    pub w_align: f64,

    pub eta_trans: f64,
    pub eta_vert: f64,
    /// Maximum yaw change per step, degrees.
    pub eta_rot: f64,
    /// Weighted torque at which rotation runs at the full `eta_rot` rate.
    pub rot_saturation: f64,

    pub t_max: usize,
    pub eps_conv: f64,

    pub lambda_evade: f64,
    pub t_deadlock: u32,
    pub window: usize,
    /// Minimum cumulative movement over the window for the oscillation trigger.
    pub d1_min_activity: f64,
    /// Maximum net displacement over the window for either trigger.
    pub d2_max_net_disp: f64,
    /// Half-width of the "opposing" cone around 180°, degrees.
    pub angle_tol: f64,
    pub sz_min: f64,
    pub deadlock_guard: bool,

    pub support_ratio_threshold: f64,
    pub wall_tolerance: f64,
    pub collision_mode: CollisionMode,
    /// Added to planar collision and boundary magnitudes so contact resolves in finitely many steps.
    pub contact_margin: f64,

    /// Seeds the evasion side choice.
    pub seed: u64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            w_col: 1.134,
            w_vcol: 2.850,
            w_bnd: 2.857,
            w_sup: 0.525,
            w_adj: 0.833,
            w_wall: 2.977,
            w_pnt: 4.688,
            w_align: 5.037,
            eta_trans: 0.208,
            eta_vert: 0.208,
            eta_rot: 8.569,
            rot_saturation: 45.0,
            t_max: 300,
            eps_conv: 1e-3,
            lambda_evade: 0.161,
            t_deadlock: 17,
            window: 20,
            d1_min_activity: 0.05,
            d2_max_net_disp: 0.01,
            angle_tol: 15.0,
            sz_min: 0.5,
            deadlock_guard: true,
            support_ratio_threshold: 0.8,
            wall_tolerance: 0.02,
            collision_mode: CollisionMode::Sat,
            contact_margin: 1e-2,
            seed: 0,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<(), String> {
        let weights = [
            ("w_col", self.w_col),
            ("w_vcol", self.w_vcol),
            ("w_bnd", self.w_bnd),
            ("w_sup", self.w_sup),
            ("w_adj", self.w_adj),
            ("w_wall", self.w_wall),
            ("w_pnt", self.w_pnt),
            ("w_align", self.w_align),
            ("lambda_evade", self.lambda_evade),
            ("contact_margin", self.contact_margin),
            ("wall_tolerance", self.wall_tolerance),
        ];
        for (name, w) in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(format!("{name} must be a finite non-negative number"));
            }
        }
        for (name, s) in [
            ("eta_trans", self.eta_trans),
            ("eta_vert", self.eta_vert),
            ("eta_rot", self.eta_rot),
            ("rot_saturation", self.rot_saturation),
            ("eps_conv", self.eps_conv),
        ] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.t_max < 1 {
            return Err("t_max must be at least 1".into());
        }
        if self.window < 2 {
            return Err("window must be at least 2".into());
        }
        if !(self.sz_min > 0.0 && self.sz_min <= 1.0) {
            return Err("sz_min must lie in (0, 1]".into());
        }
        Ok(())
    }
}
