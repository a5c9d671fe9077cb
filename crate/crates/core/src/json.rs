//! Canonical JSON output: every double is printed with 17 significant
//! digits (shortest form of `%.17g`), non-finite values become `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::geometry::{Hyperplane, Polytope};
use crate::measure::DrivingMeasure;
use crate::stit::{CellTree, Method};

/// `v` formatted like C's `%.17g`.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if v < 0.0 { "-" } else { "" };
    if (-5..17).contains(&exp) {
        let (int, frac) = if exp >= 0 {
            let k = exp as usize + 1;
            (digits[..k].to_string(), digits[k..].to_string())
        } else {
            ("0".to_string(), "0".repeat((-exp - 1) as usize) + &digits)
        };
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let m = if tail.is_empty() {
            head.to_string()
        } else {
            format!("{head}.{tail}")
        };
        let es = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{es}{:02}", exp.abs())
    }
}

/// Compact formatter with canonical doubles.
#[derive(Debug, Default, Clone, Copy)]
pub struct G17;

impl Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_g17(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        w.write_all(format_g17(v as f64).as_bytes())
    }
}

/// Pretty-printing formatter with canonical doubles.
#[derive(Debug, Default)]
pub struct PrettyG17(PrettyFormatter<'static>);

impl Formatter for PrettyG17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_g17(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        w.write_all(format_g17(v as f64).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    value.serialize(&mut serde_json::Serializer::with_formatter(&mut buf, G17))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn to_string_pretty<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    value.serialize(&mut serde_json::Serializer::with_formatter(
        &mut buf,
        PrettyG17::default(),
    ))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Serialize)]
struct NodeView<'a> {
    id: usize,
    parent: Option<usize>,
    birth: f64,
    death: Option<f64>,
    children: Option<(usize, usize)>,
    hyperplane: Option<&'a Hyperplane>,
    rejected: usize,
    cell: &'a Polytope,
}

#[derive(Serialize)]
struct TreeView<'a> {
    window: &'a Polytope,
    measure: &'a DrivingMeasure,
    method: Method,
    current_time: f64,
    jump_times: &'a [f64],
    nodes: Vec<NodeView<'a>>,
}

impl Serialize for CellTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TreeView {
            window: &self.window,
            measure: &self.measure,
            method: self.method,
            current_time: self.current_time,
            jump_times: &self.jump_times,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeView {
                    id: n.id,
                    parent: n.parent,
                    birth: n.birth,
                    death: n.death,
                    children: n.children,
                    hyperplane: n.hyperplane.as_ref(),
                    rejected: n.rejected.len(),
                    cell: &n.polytope,
                })
                .collect(),
        }
        .serialize(s)
    }
}
