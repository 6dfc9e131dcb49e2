use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{usage, Error, Result};
use crate::rng::rng_from_seed;

/// Indices of a stratified train/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class train counts by largest remainder, summing to
/// `round(n · fraction)`. Ties go to the class listed first. When the total
/// allows it every non-empty class keeps at least one training slot, taken
/// from the largest allocation.
fn allocate(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let mut alloc = largest_remainder(class_sizes, fraction);
    let nonempty = class_sizes.iter().filter(|&&s| s > 0).count();
    if alloc.iter().sum::<usize>() >= nonempty {
        for c in 0..class_sizes.len() {
            if class_sizes[c] > 0 && alloc[c] == 0 {
                let donor = (0..alloc.len()).max_by_key(|&d| alloc[d]).expect("non-empty");
                alloc[donor] -= 1;
                alloc[c] = 1;
            }
        }
    }
    alloc
}

fn largest_remainder(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let total = (n as f64 * fraction).round() as usize;
    let quotas: Vec<f64> = class_sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(alloc.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if remaining == 0 {
            break;
        }
        if alloc[c] < class_sizes[c] {
            alloc[c] += 1;
            remaining -= 1;
        }
    }
    alloc
}

/// Seeded stratified split. Positive labels come first in each output.
pub fn split_indices(labels: &[i8], train_fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(usage(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let classes: [Vec<usize>; 2] = [
        (0..labels.len()).filter(|&i| labels[i] == 1).collect(),
        (0..labels.len()).filter(|&i| labels[i] != 1).collect(),
    ];
    let sizes = [classes[0].len(), classes[1].len()];
    let alloc = allocate(&sizes, train_fraction);
    let mut rng = rng_from_seed(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (members, &k) in classes.iter().zip(&alloc) {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        train.extend_from_slice(&shuffled[..k]);
        test.extend_from_slice(&shuffled[k..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Data(format!(
            "split of {} samples at fraction {train_fraction} leaves an empty side",
            labels.len()
        )));
    }
    if alloc.contains(&0) {
        return Err(Error::Data(
            "training side would be missing a class; add samples or raise the fraction".into(),
        ));
    }
    Ok(SplitIndices { train, test })
}

pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(&d.labels, train_fraction, seed)?;
    Ok((d.select(&idx.train), d.select(&idx.test)))
}
