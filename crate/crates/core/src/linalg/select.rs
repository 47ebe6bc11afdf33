//! Floyd–Rivest selection.
//!
//! Expected `n + min(k, n - k) + o(n)` comparisons. Ranges longer than 600
//! elements first recurse on a sample to pull good pivots next to `k`.

/// Rearranges `values` so that `values[k]` holds the element that would sit
/// at index `k` after an ascending sort. Everything left of `k` is `<=` it and
/// everything right of it is `>=` it.
///
/// Values must be comparable (no NaN).
pub fn select_nth(values: &mut [f64], k: usize) {
    assert!(k < values.len(), "select index {k} out of range for length {}", values.len());
    floyd_rivest(values, 0, values.len() as isize - 1, k as isize);
}

fn floyd_rivest(a: &mut [f64], mut left: isize, mut right: isize, k: isize) {
    while right > left {
        if right - left > 600 {
            let n = (right - left + 1) as f64;
            let i = (k - left + 1) as f64;
            let z = n.ln();
            let s = 0.5 * (2.0 * z / 3.0).exp();
            let sd = 0.5 * (z * s * (n - s) / n).sqrt() * (i - n / 2.0).signum();
            let new_left = left.max((k as f64 - i * s / n + sd).floor() as isize);
            let new_right = right.min((k as f64 + (n - i) * s / n + sd).floor() as isize);
            floyd_rivest(a, new_left, new_right, k);
        }

        let t = a[k as usize];
        let mut i = left;
        let mut j = right;
        a.swap(left as usize, k as usize);
        if a[right as usize] > t {
            a.swap(right as usize, left as usize);
        }
        while i < j {
            a.swap(i as usize, j as usize);
            i += 1;
            j -= 1;
            while a[i as usize] < t {
                i += 1;
            }
            while a[j as usize] > t {
                j -= 1;
            }
        }
        if a[left as usize] == t {
            a.swap(left as usize, j as usize);
        } else {
            j += 1;
            a.swap(j as usize, right as usize);
        }

        if j <= k {
            left = j + 1;
        }
        if k <= j {
            right = j - 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(v: &[f64]) -> Vec<f64> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    }

    #[test]
    fn small_cases() {
        let mut v = vec![3.0, 1.0, 2.0];
        select_nth(&mut v, 0);
        assert_eq!(v[0], 1.0);
        select_nth(&mut v, 2);
        assert_eq!(v[2], 3.0);

        let mut one = vec![4.0];
        select_nth(&mut one, 0);
        assert_eq!(one, vec![4.0]);
    }

    #[test]
    fn long_input_takes_sampling_branch() {
        // 5000 values with heavy duplication exercises the recursive sampling.
        let v: Vec<f64> = (0..5000u64).map(|i| ((i * 7919) % 613) as f64).collect();
        let reference = sorted(&v);
        for &k in &[0, 1, 17, 2499, 2500, 4998, 4999] {
            let mut w = v.clone();
            select_nth(&mut w, k);
            assert_eq!(w[k], reference[k], "k = {k}");
            assert!(w[..k].iter().all(|&x| x <= w[k]));
            assert!(w[k + 1..].iter().all(|&x| x >= w[k]));
        }
    }

    proptest! {
        #[test]
        fn matches_sort(v in prop::collection::vec(-50i32..50, 1..1500), k_seed in any::<usize>()) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let k = k_seed % v.len();
            let mut w = v.clone();
            select_nth(&mut w, k);
            prop_assert_eq!(w[k], sorted(&v)[k]);
        }
    }
}
