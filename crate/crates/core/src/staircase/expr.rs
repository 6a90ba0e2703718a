//! A small serializable expression language for describing staircase sets in
//! manifests, evaluated to [`CellSet`]s on automatically merged grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

use super::cells::{CellSet, Corner};
use super::grid::Grid;

/// Set expression. Coordinates are rational strings like `"3/2"`, or
/// `"-inf"` for an unconstrained axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SetExpr {
    /// `[point, inf)`, componentwise; axes flagged in `strict` use an open
    /// bound instead.
    Upset {
        point: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strict: Option<Vec<bool>>,
    },
    Union { args: Vec<SetExpr> },
    Intersect { args: Vec<SetExpr> },
    Complement { arg: Box<SetExpr> },
    All { dim: usize },
    Empty { dim: usize },
    /// Explicit atom-index cells on an explicit grid.
    Cells { grid: Vec<Vec<String>>, cells: Vec<Vec<usize>> },
}

fn parse_corner(s: &str) -> Result<Corner> {
    if s == "-inf" {
        return Ok(Corner::NegInf);
    }
    let r: Rat = s
        .parse()
        .map_err(|_| Error::Invalid(format!("corner coordinate {s:?} is not a rational or \"-inf\"")))?;
    Ok(Corner::At(r))
}

pub fn eval(expr: &SetExpr) -> Result<CellSet> {
    match expr {
        SetExpr::Upset { point, strict } => {
            let corner: Vec<Corner> = point.iter().map(|s| parse_corner(s)).collect::<Result<_>>()?;
            match strict {
                None => CellSet::principal_upset(&corner),
                Some(flags) => CellSet::principal_upset_strict(&corner, flags),
            }
        }
        SetExpr::Union { args } => fold_binary(args, "union", |a, b| a.union(b)),
        SetExpr::Intersect { args } => fold_binary(args, "intersection", |a, b| a.intersect(b)),
        SetExpr::Complement { arg } => Ok(eval(arg)?.complement()),
        SetExpr::All { dim } => Ok(CellSet::all(Grid::trivial(*dim)?)),
        SetExpr::Empty { dim } => Ok(CellSet::empty(Grid::trivial(*dim)?)),
        SetExpr::Cells { grid, cells } => {
            let axes: Vec<Vec<Rat>> = grid
                .iter()
                .map(|axis| {
                    axis.iter()
                        .map(|s| {
                            s.parse().map_err(|_| {
                                Error::Invalid(format!("breakpoint {s:?} is not a rational"))
                            })
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            CellSet::from_cells(Grid::new(axes)?, cells)
        }
    }
}

fn fold_binary(
    args: &[SetExpr],
    what: &str,
    op: impl Fn(&CellSet, &CellSet) -> Result<CellSet>,
) -> Result<CellSet> {
    let mut iter = args.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Invalid(format!("{what} needs at least one argument")))?;
    let mut acc = eval(first)?;
    for next in iter {
        acc = op(&acc, &eval(next)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_shape_from_json() {
        let text = r#"{
            "op": "intersect",
            "args": [
                {"op": "upset", "point": ["0", "0"]},
                {"op": "complement", "arg": {"op": "upset", "point": ["1", "1"]}}
            ]
        }"#;
        let expr: SetExpr = serde_json::from_str(text).unwrap();
        let l = eval(&expr).unwrap();
        let by_hand = CellSet::principal_upset(&[Corner::At(Rat::int(0)), Corner::At(Rat::int(0))])
            .unwrap()
            .minus(&CellSet::principal_upset(&[Corner::At(Rat::int(1)), Corner::At(Rat::int(1))]).unwrap())
            .unwrap();
        assert!(l.equal_as_sets(&by_hand).unwrap());
    }

    #[test]
    fn strict_and_infinite_corners_parse() {
        let text = r#"{"op": "upset", "point": ["1/2", "-inf"], "strict": [true, false]}"#;
        let expr: SetExpr = serde_json::from_str(text).unwrap();
        let s = eval(&expr).unwrap();
        assert!(!s.contains_point(&[Rat::new(1, 2).unwrap(), Rat::int(0)]).unwrap());
        assert!(s.contains_point(&[Rat::int(1), Rat::int(-50)]).unwrap());
    }

    #[test]
    fn explicit_cells_round_trip_through_serde() {
        let expr = SetExpr::Cells {
            grid: vec![vec!["0".into(), "1".into()]],
            cells: vec![vec![1], vec![2]],
        };
        let text = serde_json::to_string(&expr).unwrap();
        let back: SetExpr = serde_json::from_str(&text).unwrap();
        let s = eval(&back).unwrap();
        assert_eq!(s.cell_count(), 2);
        assert!(s.contains_point(&[Rat::int(0)]).unwrap());
        assert!(!s.contains_point(&[Rat::int(1)]).unwrap());
    }

    #[test]
    fn empty_argument_lists_are_rejected() {
        assert!(eval(&SetExpr::Union { args: vec![] }).is_err());
        let all = eval(&SetExpr::All { dim: 2 }).unwrap();
        assert_eq!(all.cell_count(), 1);
        assert!(eval(&SetExpr::Empty { dim: 1 }).unwrap().is_empty_set());
    }
}
