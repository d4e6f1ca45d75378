//! The decision process is: state = normalized source/coverage features, action
//! = choice of prompting strategy, reward = weighted coverage gains minus an
//! untested-branch penalty plus uniqueness and minification bonuses.

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageSnapshot;
use crate::metrics::CodeMetrics;

/// Number of entries in a [`StateVector`].
pub const STATE_DIM: usize = 11;

/// Language of the program under test. Only C has a shipping pipeline; the
/// other indicators exist so the state layout is stable if one lands later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Language {
    C,
    Python,
    Cpp,
}

/// Normalized observation, every component in [0,1]:
/// `[loc/10000, functions/50, branches/100, loops/50, cyclomatic/100,
///   line_pct/100, branch_pct/100, is_c, is_python, is_cpp, episode/horizon]`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub [f64; STATE_DIM]);

impl StateVector {
    pub fn values(&self) -> &[f64; STATE_DIM] {
        &self.0
    }

    /// All components in [0,1] and the language block one-hot.
    pub fn is_valid(&self) -> bool {
        let in_range = self.0.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v));
        let hot: u32 = self.0[7..10].iter().map(|&v| (v == 1.0) as u32).sum();
        let cold = self.0[7..10].iter().all(|&v| v == 0.0 || v == 1.0);
        in_range && hot == 1 && cold
    }
}

/// Index into the eight-template prompt library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionId(pub(crate) usize);

/// Template names in action order.
pub const TEMPLATE_NAMES: [&str; 8] = ["BVA", "BCE", "ECH", "EPE", "LBT", "DTS", "PCM", "FUZZ"];

impl ActionId {
    pub const COUNT: usize = 8;

    pub fn from_index(index: usize) -> Option<ActionId> {
        (index < Self::COUNT).then_some(ActionId(index))
    }

    pub fn index(&self) -> usize {
        self.0
    }

    pub fn name(&self) -> &'static str {
        TEMPLATE_NAMES[self.0]
    }

    pub fn all() -> impl Iterator<Item = ActionId> {
        (0..Self::COUNT).map(ActionId)
    }
}

/// Per-episode reward with every component kept visible for logging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Line coverage gain in percentage points.
    pub line_gain: f64,
    /// Branch coverage gain in percentage points.
    pub branch_gain: f64,
    /// Fraction of the batch that was genuinely new, in [0,1].
    pub uniq_ratio: f64,
    /// Still-untested branches over total branches, in [0,1].
    pub untested_ratio: f64,
    /// Stage-I LOC reduction percentage, in [0,100].
    pub loc_reduction_pct: f64,
    pub total: f64,
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Builds the observation for one episode.
///
/// Panics when `horizon` is 0 or `episode > horizon` (contract violation).
pub fn encode_state(
    metrics: &CodeMetrics,
    line_pct: f64,
    branch_pct: f64,
    language: Language,
    episode: usize,
    horizon: usize,
) -> StateVector {
    assert!(horizon >= 1, "horizon must be at least 1");
    assert!(episode <= horizon, "episode index {episode} exceeds horizon {horizon}");

    let mut v = [0.0f64; STATE_DIM];
    v[0] = clip01(metrics.loc as f64 / 10_000.0);
    v[1] = clip01(metrics.functions as f64 / 50.0);
    v[2] = clip01(metrics.branches as f64 / 100.0);
    v[3] = clip01(metrics.loops as f64 / 50.0);
    v[4] = clip01(metrics.cyclomatic as f64 / 100.0);
    v[5] = clip01(line_pct / 100.0);
    v[6] = clip01(branch_pct / 100.0);
    let lang_slot = match language {
        Language::C => 7,
        Language::Python => 8,
        Language::Cpp => 9,
    };
    v[lang_slot] = 1.0;
    v[10] = clip01(episode as f64 / horizon as f64);
    StateVector(v)
}

/// Evaluates the composite reward for one episode.
///
/// `prev`/`curr` are the cumulative snapshots before and after the batch ran;
/// both must describe the same instrumented program. Panics when
/// `batch_size` is 0 or `uniq_count > batch_size` (contract violations).
pub fn compute_reward(
    prev: &CoverageSnapshot,
    curr: &CoverageSnapshot,
    uniq_count: usize,
    batch_size: usize,
    loc_reduction_pct: f64,
) -> RewardBreakdown {
    assert!(batch_size >= 1, "batch_size must be at least 1");
    assert!(
        uniq_count <= batch_size,
        "uniq_count {uniq_count} exceeds batch_size {batch_size}"
    );

    let line_gain = curr.line_pct() - prev.line_pct();
    let branch_gain = curr.branch_pct() - prev.branch_pct();
    let uniq_ratio = uniq_count as f64 / batch_size as f64;
    let untested_ratio = if curr.branches_total == 0 {
        0.0
    } else {
        (curr.branches_total - curr.branches_covered) as f64 / curr.branches_total as f64
    };

    let total = 0.4 * line_gain + 0.5 * branch_gain + 0.1 * uniq_ratio * 10.0
        - 0.3 * untested_ratio
        + 0.1 * f64::min(loc_reduction_pct / 100.0, 0.5);

    RewardBreakdown {
        line_gain,
        branch_gain,
        uniq_ratio,
        untested_ratio,
        loc_reduction_pct,
        total,
    }
}
