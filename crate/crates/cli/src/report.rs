//! JSON report builders and the plain-text rendering of any report.

use serde_json::{json, Map, Value};

use recsum_core::exactmath::{Ball, IntPoly, Round};

/// Every report starts with these fields.
pub fn envelope(kind: &str, config: &impl serde::Serialize) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("version".into(), json!(recsum_core::VERSION));
    m.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    m
}

pub fn ball(b: &Ball, digits: u32) -> Value {
    json!({
        "re": b.mid_re().to_decimal(digits, Round::Nearest),
        "im": b.mid_im().to_decimal(digits, Round::Nearest),
        "radius": b.radius().to_decimal(4, Round::Ceil),
    })
}

/// `x^2 - x - 1` style.
pub fn poly_string(p: &IntPoly) -> String {
    use num_traits::{One, Signed, Zero};
    let mut out = String::new();
    for (i, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        if !a.is_one() || i == 0 {
            out.push_str(&a.to_string());
        }
        match i {
            0 => {}
            1 => out.push('x'),
            _ => out.push_str(&format!("x^{i}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Indented `key: value` lines; arrays of scalars stay on one line.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- [{i}]\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        x => out.push_str(&format!("{pad}{}\n", scalar(x).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials() {
        assert_eq!(poly_string(&IntPoly::from_i64(&[-1, -1, 1])), "x^2 - x - 1");
        assert_eq!(poly_string(&IntPoly::from_i64(&[2, 0, -3, 1])), "x^3 - 3x^2 + 2");
    }

    #[test]
    fn text_rendering() {
        let v = json!({"a": 1, "b": {"c": [1, 2]}, "d": [{"e": null}]});
        assert_eq!(render_text(&v), "a: 1\nb:\n  c: [1, 2]\nd:\n  - [0]\n    e: -\n");
    }
}
