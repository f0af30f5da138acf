//! Plain-text cake instances: one agent per line, `t0 h1 t1 h2 t2 ... hm tm`.

use std::fs;
use std::path::Path;

use super::{CakeError, PiecewiseDensity};
use crate::math::{format_fraction, parse_rational};
use crate::Rational;

/// Parses one agent line.
pub fn parse_density(line: &str) -> Result<PiecewiseDensity, String> {
    let nums = line
        .split_whitespace()
        .map(|tok| parse_rational(tok).ok_or_else(|| format!("not a number: {tok:?}")))
        .collect::<Result<Vec<Rational>, _>>()?;
    if nums.len() < 3 || nums.len() % 2 == 0 {
        return Err(format!("expected t0 h1 t1 ... hm tm, got {} numbers", nums.len()));
    }
    let breaks = nums.iter().step_by(2).cloned().collect();
    let heights = nums.iter().skip(1).step_by(2).cloned().collect();
    PiecewiseDensity::new(breaks, heights).map_err(|e| e.to_string())
}

/// Parses a whole file; blank lines and `#` comments are skipped.
pub fn parse_instance(text: &str) -> Result<Vec<PiecewiseDensity>, CakeError> {
    let mut agents = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        agents.push(parse_density(line).map_err(|message| CakeError::Parse { line: no + 1, message })?);
    }
    Ok(agents)
}

pub fn format_density(d: &PiecewiseDensity) -> String {
    let mut parts = vec![format_fraction(&d.breaks()[0])];
    for (h, t) in d.heights().iter().zip(&d.breaks()[1..]) {
        parts.push(format_fraction(h));
        parts.push(format_fraction(t));
    }
    parts.join(" ")
}

pub fn format_instance(agents: &[PiecewiseDensity]) -> String {
    let mut out = String::new();
    for d in agents {
        out.push_str(&format_density(d));
        out.push('\n');
    }
    out
}

pub fn read_instance(path: &Path) -> Result<Vec<PiecewiseDensity>, CakeError> {
    let text = fs::read_to_string(path).map_err(|e| CakeError::Io(e.to_string()))?;
    parse_instance(&text)
}

pub fn write_instance(path: &Path, agents: &[PiecewiseDensity]) -> Result<(), CakeError> {
    fs::write(path, format_instance(agents)).map_err(|e| CakeError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cake::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let agents: Vec<_> = (0..5).map(|_| random_density(&mut rng, 4, 12)).collect();
        let text = format_instance(&agents);
        assert_eq!(parse_instance(&text).unwrap(), agents);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cake.txt");
        write_instance(&path, &agents).unwrap();
        assert_eq!(read_instance(&path).unwrap(), agents);
    }

    #[test]
    fn reads_mixed_notation() {
        let agents = parse_instance("# two agents\n0 1 1\n0 2 0.5 0 1\n").unwrap();
        assert_eq!(agents.len(), 2);
        assert_eq!(format_density(&agents[1]), "0/1 2/1 1/2 0/1 1/1");
    }

    #[test]
    fn reports_bad_lines() {
        let err = parse_instance("0 1 1\n0 2 1\n").unwrap_err();
        assert!(matches!(err, CakeError::Parse { line: 2, .. }));
        assert!(parse_instance("0 1").is_err());
        assert!(parse_instance("0 x 1").is_err());
    }
}
