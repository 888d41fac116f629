//! Shared on-disk matrix format: a JSON document with the register labels,
//! the matrix side, and row-major `[re, im]` entries.  Round-trips are
//! bit-stable for doubles (serde_json preserves f64 exactly).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{C64, CMatrix, LabeledOperator, RegisterLabel, SystemLayout};

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub layout: Vec<String>,
    pub side: usize,
    pub entries: Vec<[f64; 2]>,
}

pub fn to_doc(op: &LabeledOperator) -> MatrixDoc {
    let side = op.side();
    let mut entries = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let z = op.matrix()[(r, c)];
            entries.push([z.re, z.im]);
        }
    }
    MatrixDoc {
        layout: op.layout().registers().iter().map(|r| r.as_str().to_string()).collect(),
        side,
        entries,
    }
}

pub fn from_doc(doc: &MatrixDoc) -> Result<LabeledOperator> {
    let labels: Vec<RegisterLabel> = doc
        .layout
        .iter()
        .map(|s| RegisterLabel::parse(s))
        .collect::<Result<_>>()?;
    let layout = SystemLayout::new(labels)?;
    if doc.side != layout.side() {
        return Err(Error::Format(format!(
            "side {} does not match {} registers",
            doc.side,
            doc.layout.len()
        )));
    }
    if doc.entries.len() != doc.side * doc.side {
        return Err(Error::Format(format!(
            "expected {} entries, got {}",
            doc.side * doc.side,
            doc.entries.len()
        )));
    }
    let mut mat = CMatrix::zeros(doc.side, doc.side);
    for r in 0..doc.side {
        for c in 0..doc.side {
            let [re, im] = doc.entries[r * doc.side + c];
            mat[(r, c)] = C64::new(re, im);
        }
    }
    LabeledOperator::new(layout, mat)
}

pub fn write_matrix(op: &LabeledOperator, path: &std::path::Path) -> Result<()> {
    let text = serde_json::to_string(&to_doc(op))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_matrix(path: &std::path::Path) -> Result<LabeledOperator> {
    let text = std::fs::read_to_string(path)?;
    let doc: MatrixDoc = serde_json::from_str(&text)?;
    from_doc(&doc)
}
