use super::Partition;
use crate::error::{arg, Result};
use crate::sim::TruncatedKernel;

/// (S′_T a_π)(free): sum of a_π over the values of the blocks in T, all
/// distinct from each other and from the free values.
///
/// `t_set` holds 1-based block numbers; `free` gives the values of the
/// remaining blocks in increasing block order.
pub fn s_prime_sum(a: &TruncatedKernel, pi: &Partition, t_set: &[usize], free: &[usize]) -> Result<f64> {
    let m = pi.m();
    if pi.k() != a.k() {
        return arg(format!("partition of {} elements used with a kernel of order {}", pi.k(), a.k()));
    }
    let mut in_t = vec![false; m];
    for &t in t_set {
        if t == 0 || t > m || in_t[t - 1] {
            return arg(format!("T must be a set of block numbers in 1..={m}"));
        }
        in_t[t - 1] = true;
    }
    if free.len() + t_set.len() != m {
        return arg(format!("{} free values given, {} expected", free.len(), m - t_set.len()));
    }
    if let Some(v) = free.iter().find(|&&v| v == 0 || v > a.m()) {
        return arg(format!("free value {v} outside 1..={}", a.m()));
    }
    let mut values = vec![0usize; m];
    let mut fi = free.iter();
    for t in 0..m {
        if !in_t[t] {
            values[t] = *fi.next().expect("length checked");
        }
    }
    let slots: Vec<usize> = (0..m).filter(|&t| in_t[t]).collect();
    let mut used = vec![false; a.m() + 1];
    for &v in free {
        used[v] = true;
    }
    Ok(sum_rec(a, pi, &slots, 0, &mut values, &mut used))
}

fn sum_rec(
    a: &TruncatedKernel,
    pi: &Partition,
    slots: &[usize],
    pos: usize,
    values: &mut [usize],
    used: &mut [bool],
) -> f64 {
    if pos == slots.len() {
        return a.get_pi(pi, values);
    }
    let mut s = 0.0;
    for v in 1..=a.m() {
        if used[v] {
            continue;
        }
        used[v] = true;
        values[slots[pos]] = v;
        s += sum_rec(a, pi, slots, pos + 1, values, used);
        used[v] = false;
    }
    s
}
