//! Legacy ASCII VTK export on structured points.

use std::io::{self, Write};

use hhk_core::io::FieldData;

/// Writes `field` as `DATASET STRUCTURED_POINTS` with one `SCALARS` or
/// `VECTORS` array. Values use the shortest representation that parses back
/// to the same double.
pub fn write_vtk(out: &mut impl Write, field: &FieldData, name: &str) -> io::Result<()> {
    let grid = field.grid();
    let (n, h, o) = (grid.n(), grid.spacing(), grid.origin());
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{name}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {n} {n} {n}")?;
    writeln!(out, "ORIGIN {:e} {:e} {:e}", o[0], o[1], o[2])?;
    writeln!(out, "SPACING {h:e} {h:e} {h:e}")?;
    writeln!(out, "POINT_DATA {}", grid.len())?;
    match field {
        FieldData::Scalar(s) => {
            writeln!(out, "SCALARS {name} double 1")?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for v in s.values() {
                writeln!(out, "{v:e}")?;
            }
        }
        FieldData::Vector(v) => {
            writeln!(out, "VECTORS {name} double")?;
            for [x, y, z] in v.values() {
                writeln!(out, "{x:e} {y:e} {z:e}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hhk_core::{Grid3, ScalarField, VectorField};

    fn render(field: &FieldData) -> String {
        let mut buf = Vec::new();
        write_vtk(&mut buf, field, "A").unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn zero_scalar_field_on_two_nodes() {
        let g = Grid3::centered(2, 1.0).unwrap();
        let text = render(&ScalarField::zeros(g).into());
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.contains(&"DATASET STRUCTURED_POINTS"));
        assert!(lines.contains(&"POINT_DATA 8"));
        let data = &lines[lines.iter().position(|l| *l == "LOOKUP_TABLE default").unwrap() + 1..];
        assert_eq!(data.len(), 8);
        assert!(data.iter().all(|l| l.parse::<f64>().unwrap() == 0.0));
    }

    #[test]
    fn vector_field_declares_vectors() {
        let g = Grid3::centered(3, 1.0).unwrap();
        let v = VectorField::sample(g, |x| [x[0], 1.0 / 3.0, -x[2] * 1e-200]).unwrap();
        let text = render(&v.clone().into());
        let lines: Vec<&str> = text.lines().collect();
        let start = lines.iter().position(|l| *l == "VECTORS A double").unwrap() + 1;
        assert_eq!(lines.len() - start, 27);
        for (line, expected) in lines[start..].iter().zip(v.values()) {
            let parsed: Vec<f64> = line.split(' ').map(|t| t.parse().unwrap()).collect();
            assert_eq!(parsed, expected.to_vec());
        }
    }
}
