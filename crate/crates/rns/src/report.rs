//! Deterministic report and CSV emission: fixed float formatting at 17
//! significant digits, fixed row ordering, LF line endings, mandatory
//! header rows. Two runs over identical inputs produce byte-identical
//! artifacts.

use crate::model::{Control, NCOMP};
use crate::ode::ModeTrajectory;
use crate::Result;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Render a float with 17 significant digits.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One pass/fail line of a report.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Plain-text report assembled from named sections.
#[derive(Debug, Default, Clone)]
pub struct Report {
    sections: Vec<(String, Vec<String>, Vec<Check>)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, title: impl Into<String>) -> &mut Self {
        self.sections.push((title.into(), Vec::new(), Vec::new()));
        self
    }

    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        self.sections
            .last_mut()
            .expect("open a section first")
            .1
            .push(text.into());
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.sections
            .last_mut()
            .expect("open a section first")
            .2
            .push(check);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.sections
            .iter()
            .flat_map(|(_, _, checks)| checks)
            .all(|c| c.passed)
    }

    pub fn check_count(&self) -> (usize, usize) {
        let all: Vec<_> = self
            .sections
            .iter()
            .flat_map(|(_, _, checks)| checks)
            .collect();
        (all.iter().filter(|c| c.passed).count(), all.len())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (idx, (title, lines, checks)) in self.sections.iter().enumerate() {
            let _ = writeln!(out, "[{}] {}", idx + 1, title);
            for line in lines {
                let _ = writeln!(out, "  {line}");
            }
            for check in checks {
                let verdict = if check.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "  {verdict}  {} :: {}", check.name, check.detail);
            }
            out.push('\n');
        }
        let (ok, total) = self.check_count();
        let _ = writeln!(
            out,
            "overall: {}/{} checks passed -> {}",
            ok,
            total,
            if self.all_passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Write a CSV file: comma separators, `.` decimals, LF endings, header row.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Trajectory dump `mode_<xi>.csv`: columns `t`, re/im of each component,
/// `J`; the frequency is printed at 17 significant digits.
pub fn write_mode_csv(dir: &Path, trajectory: &ModeTrajectory) -> Result<PathBuf> {
    let control = if trajectory.states[0].mem.is_some() {
        Control::Memory
    } else {
        Control::Damping
    };
    let mut header: Vec<String> = vec!["t".into()];
    let names = ["v", "u", "z", "y", "phi", "theta", "p"];
    for name in names {
        header.push(format!("re_{name}"));
        header.push(format!("im_{name}"));
    }
    if control == Control::Memory {
        header.push("re_m".into());
        header.push("im_m".into());
    }
    header.push("J".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();

    let rows = trajectory.times.iter().zip(&trajectory.states).map(|(&t, s)| {
        let mut row = Vec::with_capacity(header_refs.len());
        row.push(g17(t));
        for c in 0..NCOMP {
            row.push(g17(s.hat[c].re));
            row.push(g17(s.hat[c].im));
        }
        if let Some(mm) = s.mem {
            row.push(g17(mm.m.re));
            row.push(g17(mm.m.im));
            row.push(g17(mm.j));
        } else {
            row.push(g17(0.0));
        }
        row
    });

    let path = dir.join(format!("mode_{}.csv", g17(trajectory.xi)));
    write_csv(&path, &header_refs, rows)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_has_17_significant_digits() {
        assert_eq!(g17(0.5), "5.0000000000000000e-1");
        assert_eq!(g17(1.0 / 3.0), "3.3333333333333331e-1");
        // round-trips exactly
        let x = std::f64::consts::PI * 1e-7;
        let parsed: f64 = g17(x).parse().unwrap();
        assert_eq!(parsed, x);
    }

    #[test]
    fn empty_result_set_yields_header_only_csv() {
        let dir = std::env::temp_dir().join("rns_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        write_csv(&path, &["a", "b"], Vec::<Vec<String>>::new()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
    }

    #[test]
    fn report_renders_deterministically() {
        let mut r = Report::new();
        r.section("demo");
        r.line("a line");
        r.check(Check::new("one", true, "ok"));
        r.check(Check::new("two", false, "bad"));
        let a = r.render();
        let b = r.render();
        assert_eq!(a, b);
        assert!(!r.all_passed());
        assert!(a.contains("PASS  one"));
        assert!(a.contains("FAIL  two"));
        assert!(a.contains("overall: 1/2"));
    }
}
