//! Plain-text exchange formats.
//!
//! * sequences: one label per line, UTF-8;
//! * paired sequences: CSV `x_label,y_label`.
//!
//! Frequency, joint and measure tables carry their own `to_csv`/`from_csv`.

use std::sync::Arc;

use crate::collectives::{Collective, LabelSet};
use crate::combining::PairedCollective;
use crate::error::{Error, Result};

pub fn write_sequence(c: &Collective) -> String {
    let mut out = String::with_capacity(c.len() * 4);
    for name in c.names() {
        out.push_str(name);
        out.push('\n');
    }
    out
}

/// Reads one label per line. Without an explicit label set, labels are
/// registered in order of first appearance. Blank lines are skipped.
pub fn read_sequence(text: &str, label_set: Option<Arc<LabelSet>>) -> Result<Collective> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .collect();
    let set = match label_set {
        Some(s) => s,
        None => Arc::new(first_appearance(&lines)?),
    };
    Collective::from_names(set, &lines)
}

fn first_appearance(names: &[&str]) -> Result<LabelSet> {
    let mut seen = std::collections::HashSet::new();
    LabelSet::new(names.iter().copied().filter(|n| seen.insert(*n)))
}

pub fn write_paired(z: &PairedCollective) -> String {
    let mut out = String::from("x_label,y_label\n");
    for (x, y) in z.pairs() {
        out.push_str(z.x_labels().name(*x));
        out.push(',');
        out.push_str(z.y_labels().name(*y));
        out.push('\n');
    }
    out
}

pub fn read_paired(text: &str) -> Result<PairedCollective> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "x_label,y_label" => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header `x_label,y_label`, got {other:?}"
            )))
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for line in lines {
        let (x, y) = line
            .trim_end_matches('\r')
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
        xs.push(x);
        ys.push(y);
    }
    let x = Collective::from_names(Arc::new(first_appearance(&xs)?), &xs)?;
    let y = Collective::from_names(Arc::new(first_appearance(&ys)?), &ys)?;
    crate::combining::pair(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_round_trip() {
        let c = Collective::parse_inline("+-+,+++,+-+,---").unwrap();
        let text = write_sequence(&c);
        assert_eq!(text, "+-+\n+++\n+-+\n---\n");
        assert_eq!(read_sequence(&text, None).unwrap(), c);
        let set = c.label_set().clone();
        assert_eq!(read_sequence(&text, Some(set)).unwrap(), c);
    }

    #[test]
    fn sequence_with_foreign_label_fails() {
        let set = Arc::new(LabelSet::new(["a"]).unwrap());
        assert_eq!(
            read_sequence("a\nb\n", Some(set)),
            Err(Error::UnknownLabel("b".into()))
        );
    }

    #[test]
    fn paired_round_trip() {
        let x = Collective::parse_inline("a,b,a").unwrap();
        let y = Collective::parse_inline("u,v,w").unwrap();
        let z = crate::combining::pair(&x, &y).unwrap();
        let text = write_paired(&z);
        assert_eq!(text, "x_label,y_label\na,u\nb,v\na,w\n");
        assert_eq!(read_paired(&text).unwrap(), z);
        assert!(read_paired("a,b\n").is_err());
    }
}
