//! Single passes over a dual slice that reduce per-element data into
//! value histograms or per-weight partial sums.
//!
//! Chunks are processed in batches; histogram multiplicities are integers and
//! order-free, while per-weight float sums are folded in chunk order so the
//! result does not depend on the thread count.

use std::collections::HashMap;

use crate::error::Result;
use crate::group::{DualElement, DualSlice, Label};
use crate::summation::{map_chunks, KahanSum};

const BATCH: usize = 256;

/// Values below this are treated as exact zeros.
pub const NEGLIGIBLE: f64 = 1e-300;

/// Shape information about the slice that analytic tails need.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SliceExtent {
    /// `Σ d²` over the slice.
    pub slots: u64,
    /// Number of dual elements.
    pub elements: u64,
    /// Largest `2l` for SU(2) slices.
    pub max_two_l: Option<u32>,
}

impl SliceExtent {
    fn absorb(&mut self, e: &DualElement) {
        self.slots += (e.d * e.d) as u64;
        self.elements += 1;
        if let Label::Spin(t) = e.label {
            self.max_two_l = Some(self.max_two_l.map_or(t, |m| m.max(t)));
        }
    }

    fn merge(&mut self, other: &SliceExtent) {
        self.slots += other.slots;
        self.elements += other.elements;
        self.max_two_l = match (self.max_two_l, other.max_two_l) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
}

/// Distinct positive values with multiplicities, descending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Histogram {
    pub entries: Vec<(f64, u64)>,
    pub extent: SliceExtent,
}

/// Collect `(value, multiplicity)` pairs over the slice; `emit` returns the
/// pairs for one element (multiplicities already include the factor `d`).
pub fn histogram<F>(slice: &DualSlice, keep_at_least: f64, emit: F) -> Result<Histogram>
where
    F: Fn(&DualElement) -> Result<Vec<(f64, u64)>> + Sync + Send,
{
    let floor = keep_at_least.max(NEGLIGIBLE);
    let mut global: HashMap<u64, u64> = HashMap::new();
    let mut extent = SliceExtent::default();
    let ids: Vec<usize> = (0..slice.chunk_count()).collect();
    for batch in ids.chunks(BATCH) {
        let parts = map_chunks(batch, |&i| -> Result<(Vec<(u64, u64)>, SliceExtent)> {
            let mut local: Vec<(u64, u64)> = Vec::new();
            let mut ext = SliceExtent::default();
            let mut err = None;
            slice.visit_chunk(i, |e| {
                if err.is_some() {
                    return;
                }
                ext.absorb(&e);
                match emit(&e) {
                    Ok(pairs) => {
                        for (v, m) in pairs {
                            if v >= floor && m > 0 {
                                local.push((v.to_bits(), m));
                            }
                        }
                    }
                    Err(x) => err = Some(x),
                }
            });
            if let Some(x) = err {
                return Err(x);
            }
            local.sort_unstable_by_key(|p| p.0);
            let mut merged: Vec<(u64, u64)> = Vec::with_capacity(local.len());
            for (k, m) in local {
                match merged.last_mut() {
                    Some(last) if last.0 == k => last.1 += m,
                    _ => merged.push((k, m)),
                }
            }
            Ok((merged, ext))
        });
        for part in parts {
            let (pairs, ext) = part?;
            extent.merge(&ext);
            for (k, m) in pairs {
                *global.entry(k).or_insert(0) += m;
            }
        }
    }
    let mut entries: Vec<(f64, u64)> = global.into_iter().map(|(k, m)| (f64::from_bits(k), m)).collect();
    // positive floats order like their bit patterns
    entries.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    Ok(Histogram { entries, extent })
}

/// Cumulative per-weight sums over `K` channels, ascending in weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile<const K: usize> {
    pub weights: Vec<f64>,
    /// `Σ d²` through each weight.
    pub cum_slots: Vec<u64>,
    pub cum_sums: Vec<[f64; K]>,
    pub extent: SliceExtent,
}

impl<const K: usize> WeightProfile<K> {
    /// Index of the last weight `<= cutoff`.
    pub fn position(&self, cutoff: f64) -> Option<usize> {
        let n = self.weights.partition_point(|&w| w <= cutoff);
        n.checked_sub(1)
    }
}

#[derive(Clone, Copy)]
struct ChannelAcc<const K: usize> {
    slots: u64,
    sums: [KahanSum; K],
}

/// Accumulate `emit(e)` into the bucket of `weight(e)` and form cumulative
/// sums in ascending weight order.
pub fn weight_profile<const K: usize, W, F>(slice: &DualSlice, weight: W, emit: F) -> Result<WeightProfile<K>>
where
    W: Fn(&DualElement) -> f64 + Sync + Send,
    F: Fn(&DualElement) -> Result<[f64; K]> + Sync + Send,
{
    let mut global: HashMap<u64, ChannelAcc<K>> = HashMap::new();
    let mut extent = SliceExtent::default();
    let ids: Vec<usize> = (0..slice.chunk_count()).collect();
    for batch in ids.chunks(BATCH) {
        let parts = map_chunks(batch, |&i| -> Result<(Vec<(u64, ChannelAcc<K>)>, SliceExtent)> {
            let mut local: HashMap<u64, ChannelAcc<K>> = HashMap::new();
            let mut order: Vec<u64> = Vec::new();
            let mut ext = SliceExtent::default();
            let mut err = None;
            slice.visit_chunk(i, |e| {
                if err.is_some() {
                    return;
                }
                ext.absorb(&e);
                match emit(&e) {
                    Ok(vals) => {
                        let key = weight(&e).to_bits();
                        let acc = local.entry(key).or_insert_with(|| {
                            order.push(key);
                            ChannelAcc { slots: 0, sums: [KahanSum::new(); K] }
                        });
                        acc.slots += (e.d * e.d) as u64;
                        for (s, v) in acc.sums.iter_mut().zip(vals) {
                            s.add(v);
                        }
                    }
                    Err(x) => err = Some(x),
                }
            });
            if let Some(x) = err {
                return Err(x);
            }
            let out = order.into_iter().map(|k| (k, local[&k])).collect();
            Ok((out, ext))
        });
        for part in parts {
            let (pairs, ext) = part?;
            extent.merge(&ext);
            for (k, acc) in pairs {
                match global.get_mut(&k) {
                    Some(g) => {
                        g.slots += acc.slots;
                        for (a, b) in g.sums.iter_mut().zip(acc.sums.iter()) {
                            a.merge(b);
                        }
                    }
                    None => {
                        global.insert(k, acc);
                    }
                }
            }
        }
    }
    let mut keys: Vec<u64> = global.keys().copied().collect();
    keys.sort_unstable_by(|a, b| f64::from_bits(*a).total_cmp(&f64::from_bits(*b)));
    let mut weights = Vec::with_capacity(keys.len());
    let mut cum_slots = Vec::with_capacity(keys.len());
    let mut cum_sums = Vec::with_capacity(keys.len());
    let mut slots = 0u64;
    let mut running = [KahanSum::new(); K];
    for k in keys {
        let acc = &global[&k];
        slots += acc.slots;
        let mut row = [0.0; K];
        for c in 0..K {
            running[c].add(acc.sums[c].value());
            row[c] = running[c].value();
        }
        weights.push(f64::from_bits(k));
        cum_slots.push(slots);
        cum_sums.push(row);
    }
    Ok(WeightProfile { weights, cum_slots, cum_sums, extent })
}
