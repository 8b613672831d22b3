/// Size caps for the exponential-cost routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest neighborhood support enumerated exactly.
    pub q_max: usize,
    /// Largest qubit count for the dense statevector.
    pub n_max: usize,
    /// Largest variable count for brute-force maximization.
    pub brute_force_max: usize,
    /// Largest clause count for exhaustive sign-ensemble averages.
    pub exhaustive_max_m: usize,
}

pub const Q_MAX_ENV: &str = "E3LIN2_Q_MAX";
pub const N_MAX_ENV: &str = "E3LIN2_N_MAX";

impl Default for Limits {
    fn default() -> Self {
        Limits {
            q_max: 26,
            n_max: 24,
            brute_force_max: 28,
            exhaustive_max_m: 20,
        }
    }
}

impl Limits {
    /// Defaults, with `E3LIN2_Q_MAX` / `E3LIN2_N_MAX` applied when set to a valid integer.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(v) = read_env(Q_MAX_ENV) {
            limits.q_max = v;
        }
        if let Some(v) = read_env(N_MAX_ENV) {
            limits.n_max = v;
        }
        limits
    }
}

fn read_env(key: &str) -> Option<usize> {
    std::env::var(key).ok()?.trim().parse().ok()
}
