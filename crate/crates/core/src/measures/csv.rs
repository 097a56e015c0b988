//! `atom_id,mass` and `atom_id,setting,A,B,C` tables.

use std::sync::Arc;

use super::{FiniteMeasure, HiddenSpace, Mass, ObservableTable};
use crate::error::{Error, Result};

pub fn measure_to_csv<M: Mass>(p: &FiniteMeasure<M>) -> String {
    let mut out = String::from("atom_id,mass\n");
    for (i, m) in p.masses().iter().enumerate() {
        out.push_str(&format!("{},{}\n", p.space().atom_id(i), m.render()));
    }
    out
}

fn rows(text: &str, header: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header `{header}`, got {other:?}"
            )))
        }
    }
    let width = header.split(',').count();
    lines
        .map(|l| {
            let cells: Vec<String> = l.split(',').map(|c| c.trim().to_string()).collect();
            if cells.len() == width {
                Ok(cells)
            } else {
                Err(Error::Parse(format!("bad row `{l}`")))
            }
        })
        .collect()
}

/// Without an explicit space, the atoms are taken from the rows in order.
pub fn measure_from_csv<M: Mass>(
    text: &str,
    space: Option<Arc<HiddenSpace>>,
) -> Result<FiniteMeasure<M>> {
    let rows = rows(text, "atom_id,mass")?;
    let space = match space {
        Some(s) => s,
        None => Arc::new(HiddenSpace::new(
            rows.iter()
                .map(|r| HiddenSpace::parse_atom_id(&r[0]))
                .collect::<Result<_>>()?,
        )?),
    };
    let mut mass = vec![M::zero(); space.len()];
    for r in &rows {
        mass[space.index_of(&r[0])?] = M::parse(&r[1])?;
    }
    FiniteMeasure::new(space, mass)
}

pub fn tables_to_csv(space: &HiddenSpace, tables: &[ObservableTable]) -> String {
    let mut out = String::from("atom_id,setting,A,B,C\n");
    for t in tables {
        for (i, [a, b, c]) in t.values().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{a},{b},{c}\n",
                space.atom_id(i),
                t.setting()
            ));
        }
    }
    out
}

/// Tables ordered by setting; each must cover every atom exactly once.
pub fn tables_from_csv(text: &str, space: &HiddenSpace) -> Result<Vec<ObservableTable>> {
    let mut slots: [Vec<Option<[i8; 3]>>; 4] = std::array::from_fn(|_| vec![None; space.len()]);
    let mut seen = [false; 4];
    let int = |s: &str| -> Result<i8> {
        s.parse()
            .map_err(|_| Error::Parse(format!("bad outcome `{s}`")))
    };
    for r in rows(text, "atom_id,setting,A,B,C")? {
        let setting: u8 = r[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad setting `{}`", r[1])))?;
        if !(1..=4).contains(&setting) {
            return Err(Error::Parse(format!("setting {setting} is not in 1..=4")));
        }
        let atom = space.index_of(&r[0])?;
        let slot = &mut slots[setting as usize - 1][atom];
        if slot.is_some() {
            return Err(Error::Parse(format!(
                "duplicate row for atom {} setting {setting}",
                r[0]
            )));
        }
        *slot = Some([int(&r[2])?, int(&r[3])?, int(&r[4])?]);
        seen[setting as usize - 1] = true;
    }
    let mut out = Vec::new();
    for (i, s) in slots.into_iter().enumerate() {
        if !seen[i] {
            continue;
        }
        let values = s
            .into_iter()
            .enumerate()
            .map(|(a, v)| {
                v.ok_or_else(|| {
                    Error::Parse(format!(
                        "setting {} misses atom {}",
                        i + 1,
                        space.atom_id(a)
                    ))
                })
            })
            .collect::<Result<_>>()?;
        out.push(ObservableTable::new(i as u8 + 1, values)?);
    }
    Ok(out)
}
