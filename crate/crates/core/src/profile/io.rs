use std::fs;
use std::path::Path;

use super::grid::{Grid, Profile};
use super::ProfileError;
use crate::report::fmt_f64;

pub const PROFILE_HEADER: &str = "xi,phi,psi";

pub fn write_profile_csv(path: &Path, prof: &Profile) -> Result<(), ProfileError> {
    let mut s = String::with_capacity(64 * prof.len());
    s.push_str(PROFILE_HEADER);
    s.push('\n');
    for j in 0..prof.len() {
        s.push_str(&fmt_f64(prof.grid.node(j as isize)));
        s.push(',');
        s.push_str(&fmt_f64(prof.phi[j]));
        s.push(',');
        s.push_str(&fmt_f64(prof.psi[j]));
        s.push('\n');
    }
    fs::write(path, s).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a profile written by [`write_profile_csv`]. The grid is recovered
/// from the node column and the left-tail exponent from `ψ(-l) = e^{-λ1 l}`.
pub fn read_profile_csv(path: &Path) -> Result<Profile, ProfileError> {
    let display = path.display().to_string();
    let parse_err = |msg: String| ProfileError::Parse {
        path: display.clone(),
        msg,
    };
    let text = fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: display.clone(),
        source,
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == PROFILE_HEADER => {}
        other => return Err(parse_err(format!("expected header `{PROFILE_HEADER}`, found {other:?}"))),
    }
    let (mut xs, mut phi, mut psi) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(format!("line {}: expected 3 columns", k + 2)));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(format!("line {}: {e}", k + 2)))
        };
        xs.push(num(cols[0])?);
        phi.push(num(cols[1])?);
        psi.push(num(cols[2])?);
    }
    if xs.len() < 3 {
        return Err(parse_err("need at least three nodes".into()));
    }
    let l = -xs[0];
    let m = (1.0 / (xs[1] - xs[0])).round();
    if !(m >= 2.0) {
        return Err(parse_err("node spacing does not divide 1".into()));
    }
    let grid = Grid::new(l, m as usize).map_err(|e| parse_err(e.to_string()))?;
    if grid.len() != xs.len() {
        return Err(parse_err(format!("expected {} nodes for l = {l}, m = {m}", grid.len())));
    }
    for (j, &x) in xs.iter().enumerate() {
        if (x - grid.node(j as isize)).abs() > 1e-9 {
            return Err(parse_err(format!("node {j} at {x} is off the uniform grid")));
        }
    }
    if !(psi[0] > 0.0) {
        return Err(parse_err("psi at the left end must be positive".into()));
    }
    let lambda1 = -psi[0].ln() / l;
    Profile::new(grid, lambda1, phi, psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let g = Grid::new(3.0, 4).unwrap();
        let l1 = 0.731_044_137_968;
        let prof = Profile::from_fn(g, l1, |x| 1.0 / (1.0 + (x / 3.0).exp()), |x| (l1 * x).exp() / 7.0 + 1e-3);
        let mut prof = prof;
        prof.psi[0] = (-l1 * 3.0).exp();
        write_profile_csv(&path, &prof).unwrap();
        let back = read_profile_csv(&path).unwrap();
        assert_eq!(back.phi, prof.phi);
        assert_eq!(back.psi, prof.psi);
        assert_eq!(back.grid, prof.grid);
        assert!((back.lambda1 - l1).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        fs::write(&path, "x,y\n1,2\n").unwrap();
        assert!(matches!(read_profile_csv(&path), Err(ProfileError::Parse { .. })));
        assert!(matches!(
            read_profile_csv(&dir.path().join("missing.csv")),
            Err(ProfileError::Io { .. })
        ));
    }
}
