//! Plain-text state record: `m1 m2 m3 / q1x q1y q2x q2y q3x q3y / p1x p1y p2x p2y p3x p3y`.

use super::{Masses, PhaseState};
use crate::error::{Error, Result};
use crate::vec2::Vec2;

pub fn parse_state_literal(text: &str) -> Result<(Masses, PhaseState)> {
    let groups: Vec<&str> = text.trim().split('/').collect();
    if groups.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "state literal needs 3 '/'-separated groups, found {}",
            groups.len()
        )));
    }
    let m = parse_group(groups[0], 3, "masses")?;
    let q = parse_group(groups[1], 6, "positions")?;
    let p = parse_group(groups[2], 6, "momenta")?;
    let masses = Masses::new(m[0], m[1], m[2])?;
    let q = std::array::from_fn(|k| Vec2::new(q[2 * k], q[2 * k + 1]));
    let p = std::array::from_fn(|k| Vec2::new(p[2 * k], p[2 * k + 1]));
    let state = PhaseState::new(0.0, q, p);
    state.ensure_finite()?;
    Ok((masses, state))
}

fn parse_group(group: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let values = group
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number '{tok}' in {what}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {n} numbers, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn format_state_literal(masses: &Masses, state: &PhaseState) -> String {
    let m = masses.as_array();
    let f = |x: f64| format!("{x:.16e}");
    let mut out = m.iter().map(|&x| f(x)).collect::<Vec<_>>().join(" ");
    for block in [state.q, state.p] {
        out.push_str(" /");
        for v in block {
            out.push(' ');
            out.push_str(&f(v.x));
            out.push(' ');
            out.push_str(&f(v.y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::st1;
    use proptest::prelude::*;

    #[test]
    fn parses_st1() {
        let (m, s) = parse_state_literal("1 1 1 / 1 0 0 1 -1 -1 / 1 1 -0.2 -1.4 -0.8 0.4").unwrap();
        let (s1, m1) = st1();
        assert_eq!(m, m1);
        assert_eq!(s, s1);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_state_literal("1 1 / 1 0 0 1 -1 -1 / 1 1 -0.2 -1.4 -0.8 0.4").is_err());
        assert!(parse_state_literal("1 1 1 / 1 0 0 1 -1 -1").is_err());
        assert!(parse_state_literal("1 1 x / 1 0 0 1 -1 -1 / 1 1 1 1 1 1").is_err());
        assert!(parse_state_literal("1 -1 1 / 1 0 0 1 -1 -1 / 1 1 1 1 1 1").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in prop::array::uniform12(-1e3f64..1e3), m in prop::array::uniform3(1e-3f64..1e3)) {
            let masses = Masses::new(m[0], m[1], m[2]).unwrap();
            let q = std::array::from_fn(|k| Vec2::new(vals[2 * k], vals[2 * k + 1]));
            let p = std::array::from_fn(|k| Vec2::new(vals[6 + 2 * k], vals[7 + 2 * k]));
            let s = PhaseState::new(0.0, q, p);
            let (m2, s2) = parse_state_literal(&format_state_literal(&masses, &s)).unwrap();
            prop_assert_eq!(m2, masses);
            prop_assert_eq!(s2, s);
        }
    }
}
