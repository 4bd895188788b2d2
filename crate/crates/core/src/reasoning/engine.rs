//! The discovery loop: proposals are gated, split and refined until they
//! converge, then turned into scored, deduplicated detections.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::tightest_bbox;
use crate::grid::{BinaryMask, PixelBox};
use crate::provider::FieldProvider;

use super::boundary::{
    boundary_update_frozen, has_converged_frozen, Border, Frozen, BORDERS, NONE_FROZEN,
};
use super::center::{center_reasoning, cut_is_seam, CenterDecision};
use super::detect::{confidence_parts, extract_mask, field_maxima, nms, DetectedObject};
use super::proposal::{generate_initial_proposals, Proposal};
use super::split::{component_boxes, split_children};
use super::ReasoningConfig;

/// What a converged box contributes before scene-wide normalization.
#[derive(Debug, Clone)]
struct Found {
    mask: BinaryMask,
    existence: f32,
    maxima: (f64, f64),
}

/// A box together with the borders it may not expand.
type State = (PixelBox, Frozen);

/// Result of one reasoning step. Steps depend only on the state, so they
/// are memoized across proposals.
#[derive(Debug, Clone)]
enum Step {
    Discard,
    Children(Vec<State>),
    Move(PixelBox),
    Converged(Arc<Found>),
    /// The update leaves the box unchanged without meeting the stopping rule.
    Stuck,
}

#[derive(Debug, Clone)]
enum Outcome {
    Discarded {
        unconverged: bool,
    },
    Split(Vec<State>),
    Converged {
        found: Arc<Found>,
        bbox: PixelBox,
        iterations: usize,
        trajectory: Vec<PixelBox>,
    },
}

/// A proposal that reached convergence, with the boxes it visited.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedProposal {
    pub id: usize,
    pub parent_id: Option<usize>,
    pub bbox: PixelBox,
    pub iterations: usize,
    /// Box before each boundary update, ending with the converged box.
    pub trajectory: Vec<PixelBox>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiscoveryStats {
    pub initial_proposals: usize,
    pub proposals_created: usize,
    pub discarded_existence: usize,
    pub discarded_unconverged: usize,
    pub splits: usize,
    pub converged: usize,
    /// The proposal budget ran out; some split children were never processed.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    /// Survivors of NMS in descending confidence.
    pub detections: Vec<DetectedObject>,
    /// Every converged proposal in id order.
    pub converged: Vec<ConvergedProposal>,
    pub stats: DiscoveryStats,
}

impl Discovery {
    /// Fails with [`Error::BudgetExhausted`] when the split guard tripped.
    pub fn check_budget(&self) -> Result<()> {
        if self.stats.budget_exhausted {
            Err(Error::BudgetExhausted(self.stats.proposals_created))
        } else {
            Ok(())
        }
    }

    /// Iteration counts of all converged proposals.
    pub fn iterations(&self) -> Vec<usize> {
        self.converged.iter().map(|c| c.iterations).collect()
    }
}

struct Task {
    proposal: Proposal,
    frozen: Frozen,
}

struct Engine<'a, P: FieldProvider> {
    provider: &'a P,
    config: &'a ReasoningConfig,
    scene: (usize, usize),
    memo: Mutex<HashMap<State, Step>>,
}

impl<P: FieldProvider> Engine<'_, P> {
    fn compute_step(&self, (bbox, frozen): State) -> Result<Step> {
        let bundle = self.provider.query(bbox)?;
        if (bundle.existence as f64) < self.config.tau_e {
            return Ok(Step::Discard);
        }
        match center_reasoning(&bundle.center, self.config.tau_c) {
            CenterDecision::SplitAt(px) => {
                let seams = (
                    cut_is_seam(&bundle.center, px, true),
                    cut_is_seam(&bundle.center, px, false),
                );
                let min = self.config.min_split_side;
                let kids = split_children(bbox, px)
                    .into_iter()
                    .filter(|(_, child)| child.height() >= min && child.width() >= min)
                    .map(|(cut, child)| (child, child_frozen(bbox, frozen, child, cut, seams)))
                    .collect();
                return Ok(Step::Children(kids));
            }
            CenterDecision::Components(comps) => {
                let kids = component_boxes(bbox, &comps, self.scene)
                    .into_iter()
                    .map(|child| (child, component_frozen(bbox, frozen, child)))
                    .collect();
                return Ok(Step::Children(kids));
            }
            CenterDecision::SingleObject => {}
        }
        let (next, report) =
            boundary_update_frozen(bbox, &bundle.boundary, self.config, self.scene, frozen);
        if has_converged_frozen(&report, self.config, self.blocked(bbox, frozen)) {
            return Ok(Step::Converged(Arc::new(Found {
                mask: extract_mask(&bundle, bbox, self.scene),
                existence: bundle.existence,
                maxima: field_maxima(&bundle),
            })));
        }
        if next == bbox {
            return Ok(Step::Stuck);
        }
        Ok(Step::Move(next))
    }

    /// Borders that cannot expand: frozen ones and those on the scene edge.
    fn blocked(&self, bbox: PixelBox, frozen: Frozen) -> Frozen {
        let (h, w) = self.scene;
        let at_edge = BORDERS.map(|b| match b {
            Border::Top => bbox.u1 == 0,
            Border::Left => bbox.v1 == 0,
            Border::Bottom => bbox.u2 == h - 1,
            Border::Right => bbox.v2 == w - 1,
        });
        [0, 1, 2, 3].map(|i| frozen[i] || at_edge[i])
    }

    fn step(&self, state: State) -> Result<Step> {
        if let Some(s) = self.memo.lock().expect("memo lock").get(&state) {
            return Ok(s.clone());
        }
        let s = self.compute_step(state)?;
        self.memo
            .lock()
            .expect("memo lock")
            .insert(state, s.clone());
        Ok(s)
    }

    fn run(&self, task: &Task) -> Result<Outcome> {
        let mut bbox = task.proposal.bbox;
        let mut trajectory = vec![bbox];
        let mut visited = HashSet::from([bbox]);
        for iteration in 0..=self.config.max_iterations {
            match self.step((bbox, task.frozen))? {
                Step::Discard => return Ok(Outcome::Discarded { unconverged: false }),
                Step::Children(kids) => return Ok(Outcome::Split(kids)),
                Step::Converged(found) => {
                    return Ok(Outcome::Converged {
                        found,
                        bbox,
                        iterations: iteration,
                        trajectory,
                    })
                }
                Step::Stuck => break,
                Step::Move(next) => {
                    // the dynamics are deterministic, so a repeated box means a
                    // cycle that would run to the limit unconverged
                    if iteration == self.config.max_iterations || !visited.insert(next) {
                        break;
                    }
                    bbox = next;
                    trajectory.push(bbox);
                }
            }
        }
        Ok(Outcome::Discarded { unconverged: true })
    }
}

/// Frozen borders a child keeps: those it shares with its parent.
fn inherited(parent: PixelBox, frozen: Frozen, child: PixelBox) -> Frozen {
    let same = [
        parent.u1 == child.u1,
        parent.v1 == child.v1,
        parent.u2 == child.u2,
        parent.v2 == child.v2,
    ];
    [0, 1, 2, 3].map(|i| frozen[i] && same[i])
}

/// A component lying strictly inside the parent is a whole object, so its
/// sides are where the object ends and are frozen. A component clipped by
/// the parent is only a slice of an object and keeps the inherited flags.
fn component_frozen(parent: PixelBox, frozen: Frozen, child: PixelBox) -> Frozen {
    let inside = child.u1 > parent.u1
        && child.v1 > parent.v1
        && child.u2 < parent.u2
        && child.v2 < parent.v2;
    if inside {
        [true; 4]
    } else {
        inherited(parent, frozen, child)
    }
}

/// A split child freezes its cut border when the cut is a seam, so boundary
/// reasoning cannot grow it back over the neighbor; `seams` holds that
/// verdict for the column cut and the row cut.
fn child_frozen(
    parent: PixelBox,
    frozen: Frozen,
    child: PixelBox,
    cut: Border,
    seams: (bool, bool),
) -> Frozen {
    let mut out = inherited(parent, frozen, child);
    let seam = match cut {
        Border::Left | Border::Right => seams.0,
        Border::Top | Border::Bottom => seams.1,
    };
    if seam {
        let i = BORDERS
            .iter()
            .position(|&b| b == cut)
            .expect("cut is a border");
        out[i] = true;
    }
    out
}

/// Runs the full discovery pipeline on one scene. `threads = 0` uses the
/// global pool; any other value runs in a dedicated pool of that size. The
/// result does not depend on the thread count.
pub fn discover<P: FieldProvider>(
    provider: &P,
    config: &ReasoningConfig,
    threads: usize,
) -> Result<Discovery> {
    config.validate()?;
    if threads == 0 {
        return discover_in_pool(provider, config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| discover_in_pool(provider, config))
}

fn discover_in_pool<P: FieldProvider>(provider: &P, config: &ReasoningConfig) -> Result<Discovery> {
    let scene = provider.scene_size();
    let engine = Engine {
        provider,
        config,
        scene,
        memo: Mutex::new(HashMap::new()),
    };
    let mut pending: Vec<Task> = generate_initial_proposals(scene, config)
        .into_iter()
        .map(|proposal| Task {
            proposal,
            frozen: NONE_FROZEN,
        })
        .collect();
    let mut stats = DiscoveryStats {
        initial_proposals: pending.len(),
        proposals_created: pending.len(),
        ..Default::default()
    };
    let budget = config.budget_factor.saturating_mul(pending.len());
    let mut seen: HashSet<State> = pending
        .iter()
        .map(|t| (t.proposal.bbox, t.frozen))
        .collect();
    let mut found: Vec<(ConvergedProposal, Arc<Found>)> = Vec::new();

    while !pending.is_empty() {
        let outcomes: Vec<Outcome> = pending
            .par_iter()
            .map(|t| engine.run(t))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (Task { proposal: p, .. }, outcome) in pending.into_iter().zip(outcomes) {
            match outcome {
                Outcome::Discarded { unconverged } => {
                    if unconverged {
                        stats.discarded_unconverged += 1;
                    } else {
                        stats.discarded_existence += 1;
                    }
                }
                Outcome::Split(kids) => {
                    stats.splits += 1;
                    for (k, frozen) in kids {
                        if !seen.insert((k, frozen)) {
                            continue;
                        }
                        if stats.proposals_created >= budget {
                            stats.budget_exhausted = true;
                            break;
                        }
                        next.push(Task {
                            proposal: Proposal::new(stats.proposals_created, Some(p.id), k),
                            frozen,
                        });
                        stats.proposals_created += 1;
                    }
                }
                Outcome::Converged {
                    found: f,
                    bbox,
                    iterations,
                    trajectory,
                } => {
                    stats.converged += 1;
                    found.push((
                        ConvergedProposal {
                            id: p.id,
                            parent_id: p.parent_id,
                            bbox,
                            iterations,
                            trajectory,
                        },
                        f,
                    ));
                }
            }
        }
        pending = next;
    }

    let max_area = found.iter().map(|(_, f)| f.mask.count()).max().unwrap_or(0);
    let mut candidates = Vec::new();
    for (c, f) in &found {
        let area = f.mask.count();
        if area == 0 {
            continue;
        }
        let parts = confidence_parts(f.existence as f64, f.maxima, area, max_area)?;
        candidates.push(DetectedObject {
            bbox: tightest_bbox(&f.mask)?,
            mask: f.mask.clone(),
            confidence: parts.product(),
            parts,
            iterations: c.iterations,
            proposal_id: c.id,
        });
    }
    let detections = nms(candidates, config.nms_iou);
    Ok(Discovery {
        detections,
        converged: found.into_iter().map(|(c, _)| c).collect(),
        stats,
    })
}
