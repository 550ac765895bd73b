use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MECs hosting one slice's VNFs.
pub const MECS_PER_SLICE: usize = 3;
/// Links traversed by one slice.
pub const LINKS_PER_SLICE: usize = 2;
/// Per-slice action width: one share per used MEC and per used link.
pub const ACTION_DIM: usize = MECS_PER_SLICE + LINKS_PER_SLICE;
/// Actor observation width: remaining resources on the path plus the request.
pub const LOCAL_OBS_DIM: usize = 2 * ACTION_DIM;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlicePath {
    pub mecs: [usize; MECS_PER_SLICE],
    pub links: [usize; LINKS_PER_SLICE],
}

/// Physical network: server and link capacities, the share of each reserved
/// for slicing, and the fixed path of every slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// GHz per server.
    pub mec_capacity: Vec<f64>,
    /// GHz per server reserved for slicing (J).
    pub urllc_compute_cap: f64,
    /// Gbps per link.
    pub link_capacity: Vec<f64>,
    /// Gbps per link reserved for slicing (B).
    pub urllc_bandwidth_cap: f64,
    /// Linear signal-to-noise ratio of every link.
    pub snr: f64,
    pub slice_paths: Vec<SlicePath>,
}

impl Topology {
    /// Six servers on a ring of six links plus one chord (0-3). Slice `i` runs
    /// on servers `i, i+1, i+2 (mod 6)` and the two ring links joining them.
    pub fn ring(num_paths: usize) -> Self {
        const MECS: usize = 6;
        let slice_paths = (0..num_paths)
            .map(|i| {
                let first = i % MECS;
                SlicePath {
                    mecs: [first, (first + 1) % MECS, (first + 2) % MECS],
                    links: [first, (first + 1) % MECS],
                }
            })
            .collect();
        Topology {
            mec_capacity: vec![150.0; MECS],
            urllc_compute_cap: 100.0,
            link_capacity: vec![10.0; MECS + 1],
            urllc_bandwidth_cap: 10.0,
            snr: 10.0,
            slice_paths,
        }
    }

    pub fn num_mecs(&self) -> usize {
        self.mec_capacity.len()
    }

    pub fn num_links(&self) -> usize {
        self.link_capacity.len()
    }

    pub fn path(&self, slice: usize) -> Result<&SlicePath> {
        self.slice_paths.get(slice).ok_or(Error::UnknownSlice(slice))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.mec_capacity.is_empty() || self.link_capacity.is_empty() {
            return bad("topology needs at least one MEC and one link".into());
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.urllc_compute_cap) || !positive(self.urllc_bandwidth_cap) {
            return bad("reserved capacities must be positive".into());
        }
        if !(self.snr.is_finite() && self.snr >= 0.0) {
            return bad(format!("snr must be non-negative, got {}", self.snr));
        }
        for (m, &cap) in self.mec_capacity.iter().enumerate() {
            if !positive(cap) || self.urllc_compute_cap > cap {
                return bad(format!("MEC {m}: capacity {cap} must be positive and >= J"));
            }
        }
        for (l, &cap) in self.link_capacity.iter().enumerate() {
            if !positive(cap) || self.urllc_bandwidth_cap > cap {
                return bad(format!("link {l}: capacity {cap} must be positive and >= B"));
            }
        }
        for (i, path) in self.slice_paths.iter().enumerate() {
            if path.mecs.iter().any(|&m| m >= self.num_mecs()) || path.links.iter().any(|&l| l >= self.num_links()) {
                return bad(format!("slice {i}: path references a missing MEC or link"));
            }
            let [a, b, c] = path.mecs;
            if a == b || b == c || a == c || path.links[0] == path.links[1] {
                return bad(format!("slice {i}: path repeats a MEC or link"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_paths_wrap_around() {
        let topo = Topology::ring(8);
        topo.validate().unwrap();
        assert_eq!(topo.num_mecs(), 6);
        assert_eq!(topo.num_links(), 7);
        assert_eq!(topo.slice_paths[4].mecs, [4, 5, 0]);
        assert_eq!(topo.slice_paths[5].links, [5, 0]);
        assert_eq!(topo.slice_paths[6], topo.slice_paths[0]);
    }

    #[test]
    fn rejects_reserved_cap_above_capacity() {
        let mut topo = Topology::ring(4);
        topo.urllc_compute_cap = 200.0;
        assert!(matches!(topo.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_dangling_path() {
        let mut topo = Topology::ring(4);
        topo.slice_paths[1].links = [0, 9];
        assert!(topo.validate().is_err());
        topo.slice_paths[1].links = [2, 2];
        assert!(topo.validate().is_err());
    }
}
