//! Simultaneous transmissions across the center cut under three antenna
//! models, with an independent schedule checker.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{disk_edges, within_range, NetworkInstance, Point, CUT_X};

pub const DEFAULT_EPS_ANG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum AntennaModel {
    Omni,
    SingleBeam { eps_ang: f64 },
    MultiBeam { eps_ang: f64 },
}

impl AntennaModel {
    pub fn eps_ang(&self) -> Option<f64> {
        match *self {
            AntennaModel::Omni => None,
            AntennaModel::SingleBeam { eps_ang } | AntennaModel::MultiBeam { eps_ang } => Some(eps_ang),
        }
    }

    fn check(&self) -> Result<()> {
        match self.eps_ang() {
            Some(e) if !(e > 0.0 && e < PI / 2.0) => {
                invalid(format!("angular resolution must lie in (0, pi/2), got {e}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AntennaModel::Omni => "omni",
            AntennaModel::SingleBeam { .. } => "single-beam",
            AntennaModel::MultiBeam { .. } => "multi-beam",
        }
    }

    /// Parses `omni`, `single-beam` or `multi-beam`.
    pub fn parse(name: &str, eps_ang: f64) -> Result<Self> {
        let m = match name {
            "omni" => AntennaModel::Omni,
            "single-beam" => AntennaModel::SingleBeam { eps_ang },
            "multi-beam" => AntennaModel::MultiBeam { eps_ang },
            other => return invalid(format!("unknown antenna model {other:?}")),
        };
        m.check()?;
        Ok(m)
    }
}

impl fmt::Display for AntennaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AntennaModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AntennaModel::parse(s, DEFAULT_EPS_ANG)
    }
}

/// Directed `(transmitter, receiver)` pairs active at the same time, each
/// crossing the cut from left to right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutSchedule {
    pub model: AntennaModel,
    pub pairs: Vec<(usize, usize)>,
}

impl CutSchedule {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Writes `tx_index,rx_index,tx_x,tx_y,rx_x,rx_y` rows with a header.
    pub fn write_csv<W: Write>(&self, inst: &NetworkInstance, mut w: W) -> Result<()> {
        writeln!(w, "tx_index,rx_index,tx_x,tx_y,rx_x,rx_y")?;
        for &(t, r) in &self.pairs {
            let (a, b) = (inst.nodes[t], inst.nodes[r]);
            writeln!(w, "{t},{r},{},{},{},{}", a.x, a.y, b.x, b.y)?;
        }
        Ok(())
    }
}

/// Upper bound `2 / (pi d)` on simultaneous omnidirectional cut crossings.
pub fn omni_cut_upper(d: f64) -> Result<f64> {
    if !(d > 0.0 && d < 0.5) {
        return invalid(format!("radius must lie in (0, 1/2), got {d}"));
    }
    Ok(2.0 / (PI * d))
}

/// Number of disjoint radius-`d` disks stacked along the cut.
pub fn omni_disk_count(d: f64) -> usize {
    (1.0 / (2.0 * d)).floor() as usize
}

/// Disk construction: radius-`d` disks centered on the cut at
/// `y = (2j - 1) d`. Each disk holding an in-range left/right pair
/// contributes its lexicographically smallest `(tx, rx)`, unless that pair
/// would collide with a pair already scheduled from a lower disk.
pub fn omni_schedule(inst: &NetworkInstance) -> Result<CutSchedule> {
    let d = inst.d;
    if !(d > 0.0 && d < 0.5) {
        return invalid(format!("radius must lie in (0, 1/2), got {d}"));
    }
    let nodes = &inst.nodes;
    let disks = omni_disk_count(d);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); disks];
    for (i, p) in nodes.iter().enumerate() {
        if (p.x - CUT_X).abs() > d {
            continue;
        }
        // The disk whose center is nearest in y is the only candidate.
        let j = ((p.y / (2.0 * d)).floor() as usize).min(disks.saturating_sub(1));
        let center = Point::new(CUT_X, (2 * j + 1) as f64 * d);
        if disks > 0 && within_range(p, &center, d) {
            members[j].push(i);
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for m in &members {
        let left: Vec<usize> = m.iter().copied().filter(|&i| nodes[i].is_left()).collect();
        let right: Vec<usize> = m.iter().copied().filter(|&i| !nodes[i].is_left()).collect();
        'search: for &t in &left {
            for &r in &right {
                if !within_range(&nodes[t], &nodes[r], d) {
                    continue;
                }
                let clash = pairs
                    .iter()
                    .any(|&(t2, r2)| within_range(&nodes[t2], &nodes[r], d) || within_range(&nodes[t], &nodes[r2], d));
                if !clash {
                    pairs.push((t, r));
                    break 'search;
                }
            }
        }
    }
    Ok(CutSchedule {
        model: AntennaModel::Omni,
        pairs,
    })
}

/// All in-range `(tx, rx)` pairs with `tx` left of the cut and `rx` right of
/// it, sorted.
pub fn cut_pairs(inst: &NetworkInstance) -> Vec<(usize, usize)> {
    let strip: Vec<usize> = (0..inst.nodes.len())
        .filter(|&i| (inst.nodes[i].x - CUT_X).abs() <= inst.d)
        .collect();
    let pts: Vec<Point> = strip.iter().map(|&i| inst.nodes[i]).collect();
    let mut out: Vec<(usize, usize)> = disk_edges(&pts, inst.d)
        .into_iter()
        .filter_map(|(a, b)| {
            let (u, v) = (strip[a], strip[b]);
            match (inst.nodes[u].is_left(), inst.nodes[v].is_left()) {
                (true, false) => Some((u, v)),
                (false, true) => Some((v, u)),
                _ => None,
            }
        })
        .collect();
    out.sort_unstable();
    out
}

/// Direction of the line from `r` to `t`, reduced modulo pi.
fn line_angle(r: &Point, t: &Point) -> f64 {
    (t.y - r.y).atan2(t.x - r.x).rem_euclid(PI)
}

fn lines_close(a: f64, b: f64, eps: f64) -> bool {
    let diff = (a - b).abs();
    diff.min(PI - diff) < eps
}

/// Beam-model schedules.
///
/// Single beam: left transmitters, in index order, each take the
/// lowest-index in-range receiver not yet taken (or, failing that, the
/// lowest-index in-range receiver); then, per receiver, a pair whose
/// transmitter lies on a line through the receiver already used by an
/// earlier pair is dropped.
///
/// Multi beam: every in-range pair, minus both edges of any two
/// transmitters collinear through a shared receiver.
pub fn beam_cut_edges(inst: &NetworkInstance, model: AntennaModel) -> Result<CutSchedule> {
    model.check()?;
    let nodes = &inst.nodes;
    let all = cut_pairs(inst);
    let pairs = match model {
        AntennaModel::Omni => return invalid("beam_cut_edges needs a beam model"),
        AntennaModel::SingleBeam { eps_ang } => {
            let mut taken = vec![false; nodes.len()];
            let mut chosen = Vec::new();
            let mut i = 0;
            while i < all.len() {
                let t = all[i].0;
                let mut end = i;
                while end < all.len() && all[end].0 == t {
                    end += 1;
                }
                let group = &all[i..end];
                let r = group.iter().map(|&(_, r)| r).find(|&r| !taken[r]).unwrap_or(group[0].1);
                taken[r] = true;
                chosen.push((t, r));
                i = end;
            }
            let mut kept_lines: Vec<Vec<f64>> = vec![Vec::new(); nodes.len()];
            let mut kept = Vec::new();
            for (t, r) in chosen {
                let a = line_angle(&nodes[r], &nodes[t]);
                if kept_lines[r].iter().any(|&b| lines_close(a, b, eps_ang)) {
                    continue;
                }
                kept_lines[r].push(a);
                kept.push((t, r));
            }
            kept
        }
        AntennaModel::MultiBeam { eps_ang } => {
            let mut by_rx: Vec<Vec<(f64, usize)>> = vec![Vec::new(); nodes.len()];
            for (idx, &(t, r)) in all.iter().enumerate() {
                by_rx[r].push((line_angle(&nodes[r], &nodes[t]), idx));
            }
            let mut dead = vec![false; all.len()];
            for list in by_rx.iter_mut().filter(|l| l.len() > 1) {
                list.sort_by(|a, b| a.0.total_cmp(&b.0));
                let k = list.len();
                for i in 0..k {
                    // Neighbors in sorted order, plus the wrap at pi.
                    let j = (i + 1) % k;
                    if lines_close(list[i].0, list[j].0, eps_ang) {
                        dead[list[i].1] = true;
                        dead[list[j].1] = true;
                    }
                }
            }
            all.iter().zip(&dead).filter(|(_, &x)| !x).map(|(&p, _)| p).collect()
        }
    };
    Ok(CutSchedule { model, pairs })
}

pub fn schedule(inst: &NetworkInstance, model: AntennaModel) -> Result<CutSchedule> {
    match model {
        AntennaModel::Omni => omni_schedule(inst),
        _ => beam_cut_edges(inst, model),
    }
}

/// Re-derives every constraint of the schedule's model from the raw
/// coordinates by pairwise comparison. Returns the first violation found.
pub fn check_schedule(inst: &NetworkInstance, sched: &CutSchedule) -> std::result::Result<(), String> {
    let nodes = &inst.nodes;
    let d2 = inst.d * inst.d;
    let mut seen = std::collections::BTreeSet::new();
    for &(t, r) in &sched.pairs {
        if t >= nodes.len() || r >= nodes.len() {
            return Err(format!("pair ({t}, {r}) is out of range"));
        }
        let (a, b) = (nodes[t], nodes[r]);
        if !(a.x < 0.5 && b.x >= 0.5) {
            return Err(format!("pair ({t}, {r}) does not cross the cut left to right"));
        }
        let dist2 = (a.x - b.x).powi(2) + (a.y - b.y).powi(2);
        if dist2 > d2 {
            return Err(format!("pair ({t}, {r}) is out of range"));
        }
        if !seen.insert((t, r)) {
            return Err(format!("pair ({t}, {r}) is repeated"));
        }
    }
    let p = &sched.pairs;
    match sched.model {
        AntennaModel::Omni => {
            for (i, &(t, r)) in p.iter().enumerate() {
                for (j, &(t2, r2)) in p.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    if t == t2 || r == r2 || t == r2 || r == t2 {
                        return Err(format!("node shared by pairs ({t}, {r}) and ({t2}, {r2})"));
                    }
                    let (x, y) = (nodes[t2], nodes[r]);
                    if (x.x - y.x).powi(2) + (x.y - y.y).powi(2) <= d2 {
                        return Err(format!("receiver {r} hears transmitter {t2} as well as {t}"));
                    }
                }
            }
        }
        AntennaModel::SingleBeam { eps_ang } | AntennaModel::MultiBeam { eps_ang } => {
            let single = matches!(sched.model, AntennaModel::SingleBeam { .. });
            for (i, &(t, r)) in p.iter().enumerate() {
                for &(t2, r2) in &p[i + 1..] {
                    if single && t == t2 {
                        return Err(format!("transmitter {t} forms two beams"));
                    }
                    if r != r2 {
                        continue;
                    }
                    // Angle at the receiver between the two transmitters,
                    // via the cross and dot products.
                    let (u, v) = (nodes[t], nodes[t2]);
                    let (ux, uy) = (u.x - nodes[r].x, u.y - nodes[r].y);
                    let (vx, vy) = (v.x - nodes[r].x, v.y - nodes[r].y);
                    let angle = (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy);
                    if angle < eps_ang || PI - angle < eps_ang {
                        return Err(format!("transmitters {t} and {t2} are collinear through receiver {r}"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Narrow beams needed to cover a radius-`d` disk: `n pi d^2`.
pub fn beam_count(n: usize, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("radius must be positive, got {d}"));
    }
    Ok(n as f64 * PI * d * d)
}

/// Expected empty bins after `m` balls land uniformly in `m` bins.
pub fn expected_empty_bins(m: u64) -> Result<f64> {
    if m == 0 {
        return invalid("need at least one bin");
    }
    let m = m as f64;
    Ok(m * (1.0 - 1.0 / m).powf(m))
}

/// Empty bins after throwing `balls` uniformly into `bins`.
pub fn simulate_empty_bins<R: Rng>(bins: usize, balls: usize, rng: &mut R) -> Result<usize> {
    if bins == 0 {
        return invalid("need at least one bin");
    }
    let mut hit = vec![false; bins];
    for _ in 0..balls {
        hit[rng.gen_range(0..bins)] = true;
    }
    Ok(hit.iter().filter(|&&h| !h).count())
}
