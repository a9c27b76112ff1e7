#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use symdyn_core::synthgen::{gen_scm, ScmSpec};

/// Write an experience-sampling style CSV: `n_per_group` GAD individuals
/// with white-noise symptoms, as many MDD individuals with strongly
/// autocorrelated and cross-lagged symptoms, and `n_comorbid` in between.
/// Every tenth row of the first individual has a missing value.
pub fn write_dataset(path: &Path, n_per_group: usize, n_comorbid: usize, t: usize, n_vars: usize, seed: u64) {
    let mut csv = String::from("id,diagnosis");
    for j in 0..n_vars {
        write!(csv, ",s{j}").unwrap();
    }
    csv.push('\n');
    let groups = [("GAD", n_per_group, 0.0), ("MDD", n_per_group, 0.85), ("COMORBID", n_comorbid, 0.5)];
    let mut k = 0;
    for (label, count, ar) in groups {
        for _ in 0..count {
            let mut spec = ScmSpec::new(n_vars);
            if ar > 0.0 {
                for j in 0..n_vars {
                    spec = spec.linear(j, j, 1, ar);
                }
                spec = spec.linear(0, 1, 1, 0.4);
            }
            let (ts, _) = gen_scm(&spec, t, 1.0, seed * 1000 + k).unwrap();
            for r in 0..t {
                write!(csv, "P{k:02},{label}").unwrap();
                for (j, v) in ts.row(r).iter().enumerate() {
                    if k == 0 && r % 10 == 9 && j == 0 {
                        csv.push_str(",NA");
                    } else {
                        write!(csv, ",{:.4}", 50.0 + 15.0 * v).unwrap();
                    }
                }
                csv.push('\n');
            }
            k += 1;
        }
    }
    std::fs::write(path, csv).unwrap();
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
