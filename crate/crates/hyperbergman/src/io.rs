//! Quadrature-rule and kernel files.
//!
//! Both formats start with a text header of `key = value` lines closed by a
//! `data` line. Rules carry one record per node (four coordinates, the
//! weight, and for surfaces four normal components), either as text rows or
//! as little-endian 64-bit floats. Kernel files always store the Gram matrix
//! and its inverse in binary, row-major, four floats per quaternion entry.

use std::io::{BufRead, Write};

use hyperbergman_core::bergman::{BasisSpec, DiscreteKernel, Family, Transport, Weight};
use hyperbergman_core::moebius::MoebiusMap;
use hyperbergman_core::quadrature::{RuleDescriptor, RuleKind, SurfaceRule, VolumeRule};
use hyperbergman_core::{Complex64, Quaternion, ThetaPoint};

use crate::report::fmt_float;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("header: {0}")]
    Header(String),
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },
}

type Result<T> = std::result::Result<T, FormatError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Text,
    Binary,
}

const RULE_MAGIC: &str = "# hyperbergman rule v1";
const KERNEL_MAGIC: &str = "# hyperbergman kernel v1";

fn header_err(m: impl Into<String>) -> FormatError {
    FormatError::Header(m.into())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(" ")
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| header_err(format!("bad number `{t}`")))).collect()
}

fn parse_fixed<const N: usize>(s: &str) -> Result<[f64; N]> {
    let v = parse_floats(s)?;
    v.try_into().map_err(|v: Vec<f64>| header_err(format!("expected {N} numbers, got {}", v.len())))
}

/// Header lines up to `data`, as ordered pairs.
struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    fn read<R: BufRead>(r: &mut R, magic: &str) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != magic {
            return Err(header_err(format!("expected `{magic}`")));
        }
        let mut entries = Vec::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(header_err("missing `data` line"));
            }
            let l = line.trim_end();
            if l == "data" {
                return Ok(Self { entries });
            }
            let (k, v) = l.split_once(" = ").ok_or_else(|| header_err(format!("malformed line `{l}`")))?;
            entries.push((k.to_string(), v.to_string()));
        }
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()).ok_or_else(|| header_err(format!("missing `{key}`")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        let [v] = parse_fixed::<1>(self.get(key)?)?;
        Ok(v)
    }

    fn int<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.parse().map_err(|_| header_err(format!("bad integer for `{key}`")))
    }
}

fn point(a: [f64; 4]) -> ThetaPoint {
    ThetaPoint::from_array(a)
}

fn kind_line(kind: &RuleKind) -> String {
    match kind {
        RuleKind::Ball { center, radius } => format!("ball {} {}", join(&center.c), fmt_float(*radius)),
        RuleKind::Box { lo, hi } => format!("box {} {}", join(lo), join(hi)),
        RuleKind::Polar { center, radius, pole, inner } => {
            format!("polar {} {} {} {}", join(&center.c), fmt_float(*radius), join(&pole.c), fmt_float(*inner))
        }
        RuleKind::Sphere { center, radius } => format!("sphere {} {}", join(&center.c), fmt_float(*radius)),
        RuleKind::Pushforward => "pushforward".to_string(),
    }
}

fn parse_kind(s: &str) -> Result<RuleKind> {
    let (tag, rest) = s.split_once(' ').unwrap_or((s, ""));
    let v = parse_floats(rest)?;
    let need = |n: usize| if v.len() == n { Ok(()) } else { Err(header_err(format!("rule kind `{tag}` takes {n} numbers"))) };
    let p = |i: usize| point([v[i], v[i + 1], v[i + 2], v[i + 3]]);
    Ok(match tag {
        "ball" => {
            need(5)?;
            RuleKind::Ball { center: p(0), radius: v[4] }
        }
        "box" => {
            need(8)?;
            RuleKind::Box { lo: [v[0], v[1], v[2], v[3]], hi: [v[4], v[5], v[6], v[7]] }
        }
        "polar" => {
            need(10)?;
            RuleKind::Polar { center: p(0), radius: v[4], pole: p(5), inner: v[9] }
        }
        "sphere" => {
            need(5)?;
            RuleKind::Sphere { center: p(0), radius: v[4] }
        }
        "pushforward" => {
            need(0)?;
            RuleKind::Pushforward
        }
        _ => return Err(header_err(format!("unknown rule kind `{tag}`"))),
    })
}

fn descriptor_lines(d: &RuleDescriptor) -> String {
    let exc = match d.excision {
        None => "none".to_string(),
        Some((p, r)) => format!("{} {}", join(&p.c), fmt_float(r)),
    };
    format!("kind = {}\nlevel = {}\nexcision = {}\n", kind_line(&d.kind), d.level, exc)
}

fn parse_descriptor(h: &Header) -> Result<RuleDescriptor> {
    let exc = match h.get("excision")? {
        "none" => None,
        s => {
            let v = parse_fixed::<5>(s)?;
            Some((point([v[0], v[1], v[2], v[3]]), v[4]))
        }
    };
    Ok(RuleDescriptor { kind: parse_kind(h.get("kind")?)?, level: h.int("level")?, excision: exc })
}

fn write_records<W: Write>(w: &mut W, records: impl Iterator<Item = Vec<f64>>, enc: Encoding) -> Result<()> {
    for rec in records {
        match enc {
            Encoding::Text => writeln!(w, "{}", join(&rec))?,
            Encoding::Binary => {
                for x in rec {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn read_records<R: BufRead>(r: &mut R, n: usize, width: usize, enc: Encoding) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(n);
    let mut line = String::new();
    let mut buf = [0u8; 8];
    for index in 0..n {
        match enc {
            Encoding::Text => {
                line.clear();
                r.read_line(&mut line)?;
                let v = parse_floats(&line).map_err(|e| FormatError::Record { index, message: e.to_string() })?;
                if v.len() != width {
                    return Err(FormatError::Record { index, message: format!("expected {width} numbers, got {}", v.len()) });
                }
                out.push(v);
            }
            Encoding::Binary => {
                let mut v = Vec::with_capacity(width);
                for _ in 0..width {
                    r.read_exact(&mut buf).map_err(|e| FormatError::Record { index, message: e.to_string() })?;
                    v.push(f64::from_le_bytes(buf));
                }
                out.push(v);
            }
        }
    }
    Ok(out)
}

fn encoding_name(e: Encoding) -> &'static str {
    match e {
        Encoding::Text => "text",
        Encoding::Binary => "binary",
    }
}

fn parse_encoding(s: &str) -> Result<Encoding> {
    match s {
        "text" => Ok(Encoding::Text),
        "binary" => Ok(Encoding::Binary),
        _ => Err(header_err(format!("unknown encoding `{s}`"))),
    }
}

pub fn write_volume_rule<W: Write>(mut w: W, rule: &VolumeRule, enc: Encoding) -> Result<()> {
    write!(
        w,
        "{RULE_MAGIC}\nshape = volume\nencoding = {}\n{}excised_volume = {}\nnodes = {}\ndata\n",
        encoding_name(enc),
        descriptor_lines(&rule.descriptor),
        fmt_float(rule.excised_volume),
        rule.len()
    )?;
    let recs = rule.nodes.iter().zip(&rule.weights).map(|(p, wt)| vec![p.c[0], p.c[1], p.c[2], p.c[3], *wt]);
    write_records(&mut w, recs, enc)?;
    w.flush()?;
    Ok(())
}

pub fn write_surface_rule<W: Write>(mut w: W, rule: &SurfaceRule, enc: Encoding) -> Result<()> {
    write!(
        w,
        "{RULE_MAGIC}\nshape = surface\nencoding = {}\n{}nodes = {}\ndata\n",
        encoding_name(enc),
        descriptor_lines(&rule.descriptor),
        rule.len()
    )?;
    let recs = (0..rule.len()).map(|i| {
        let (p, n) = (&rule.nodes[i], &rule.normals[i]);
        vec![p.c[0], p.c[1], p.c[2], p.c[3], rule.weights[i], n.c[0], n.c[1], n.c[2], n.c[3]]
    });
    write_records(&mut w, recs, enc)?;
    w.flush()?;
    Ok(())
}

fn rule_header<R: BufRead>(r: &mut R, shape: &str) -> Result<(Header, Encoding, usize)> {
    let h = Header::read(r, RULE_MAGIC)?;
    if h.get("shape")? != shape {
        return Err(header_err(format!("expected a {shape} rule")));
    }
    let enc = parse_encoding(h.get("encoding")?)?;
    let n = h.int("nodes")?;
    Ok((h, enc, n))
}

pub fn read_volume_rule<R: BufRead>(mut r: R) -> Result<VolumeRule> {
    let (h, enc, n) = rule_header(&mut r, "volume")?;
    let recs = read_records(&mut r, n, 5, enc)?;
    Ok(VolumeRule {
        nodes: recs.iter().map(|v| point([v[0], v[1], v[2], v[3]])).collect(),
        weights: recs.iter().map(|v| v[4]).collect(),
        descriptor: parse_descriptor(&h)?,
        excised_volume: h.float("excised_volume")?,
    })
}

pub fn read_surface_rule<R: BufRead>(mut r: R) -> Result<SurfaceRule> {
    let (h, enc, n) = rule_header(&mut r, "surface")?;
    let recs = read_records(&mut r, n, 9, enc)?;
    Ok(SurfaceRule {
        nodes: recs.iter().map(|v| point([v[0], v[1], v[2], v[3]])).collect(),
        weights: recs.iter().map(|v| v[4]).collect(),
        normals: recs.iter().map(|v| point([v[5], v[6], v[7], v[8]])).collect(),
        descriptor: parse_descriptor(&h)?,
    })
}

fn quats(q: &[Quaternion]) -> Vec<f64> {
    q.iter().flat_map(|x| x.to_array()).collect()
}

fn map_line(m: &MoebiusMap) -> String {
    format!("{} {}", join(&quats(&[m.a, m.b, m.c, m.d])), fmt_float(m.diam))
}

fn parse_map(v: &[f64]) -> Result<MoebiusMap> {
    let q = |k: usize| Quaternion::new(v[4 * k], v[4 * k + 1], v[4 * k + 2], v[4 * k + 3]);
    MoebiusMap::new(q(0), q(1), q(2), q(3)).map(|m| m.with_diam(v[16])).map_err(|e| header_err(e.to_string()))
}

fn complex_pair_line(a: Complex64, b: Complex64) -> String {
    join(&[a.re, a.im, b.re, b.im])
}

fn weight_line(w: &Weight) -> String {
    match w {
        Weight::Unit => "unit".to_string(),
        Weight::Lambda(u) => format!("lambda {}", join(&u.to_array())),
        Weight::T { alpha, beta } => format!("t {}", complex_pair_line(*alpha, *beta)),
        Weight::TSingle { alpha, beta } => format!("t_single {}", complex_pair_line(*alpha, *beta)),
        Weight::Gamma { map, u, v } => format!("gamma {} {}", map_line(map), join(&quats(&[*u, *v]))),
    }
}

fn parse_weight(s: &str) -> Result<Weight> {
    let (tag, rest) = s.split_once(' ').unwrap_or((s, ""));
    let v = parse_floats(rest)?;
    let need = |n: usize| if v.len() == n { Ok(()) } else { Err(header_err(format!("weight `{tag}` takes {n} numbers"))) };
    let c = |i: usize| Complex64::new(v[i], v[i + 1]);
    let q = |i: usize| Quaternion::new(v[i], v[i + 1], v[i + 2], v[i + 3]);
    Ok(match tag {
        "unit" => {
            need(0)?;
            Weight::Unit
        }
        "lambda" => {
            need(4)?;
            Weight::Lambda(q(0))
        }
        "t" => {
            need(4)?;
            Weight::T { alpha: c(0), beta: c(2) }
        }
        "t_single" => {
            need(4)?;
            Weight::TSingle { alpha: c(0), beta: c(2) }
        }
        "gamma" => {
            need(25)?;
            Weight::Gamma { map: parse_map(&v[..17])?, u: q(17), v: q(21) }
        }
        _ => return Err(header_err(format!("unknown weight `{tag}`"))),
    })
}

/// Writes the kernel with its basis, weight, rule descriptor and condition
/// number. Reading it back gives an identical [`DiscreteKernel`].
pub fn write_kernel<W: Write>(mut w: W, k: &DiscreteKernel) -> Result<()> {
    let spec = &k.spec;
    let family = match spec.family {
        Family::Theta { u } => format!("theta {}", join(&u.to_array())),
        Family::AlphaBeta { alpha, beta } => format!("alpha_beta {}", complex_pair_line(alpha, beta)),
    };
    let transport = match &spec.transport {
        None => "none".to_string(),
        Some(t) => format!("{} {}", map_line(&t.map), join(&quats(&[t.u, t.v]))),
    };
    let d = &k.rule;
    let exc = match d.excision {
        None => "none".to_string(),
        Some((p, r)) => format!("{} {}", join(&p.c), fmt_float(r)),
    };
    write!(
        w,
        "{KERNEL_MAGIC}\ntheta = {}\nfamily = {family}\ndegree = {}\ntransport = {transport}\nweight = {}\n\
         kind = {}\nlevel = {}\nexcision = {exc}\ncond = {}\nn = {}\ndata\n",
        fmt_float(spec.theta),
        spec.degree,
        weight_line(&k.weight),
        kind_line(&d.kind),
        d.level,
        fmt_float(k.cond),
        k.len(),
    )?;
    for q in k.gram.iter().chain(&k.coeffs) {
        for x in q.to_array() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_kernel<R: BufRead>(mut r: R) -> Result<DiscreteKernel> {
    let h = Header::read(&mut r, KERNEL_MAGIC)?;
    let fam = h.get("family")?;
    let (tag, rest) = fam.split_once(' ').unwrap_or((fam, ""));
    let v = parse_fixed::<4>(rest)?;
    let family = match tag {
        "theta" => Family::Theta { u: Quaternion::from_array(v) },
        "alpha_beta" => Family::AlphaBeta { alpha: Complex64::new(v[0], v[1]), beta: Complex64::new(v[2], v[3]) },
        _ => return Err(header_err(format!("unknown family `{tag}`"))),
    };
    let transport = match h.get("transport")? {
        "none" => None,
        s => {
            let v = parse_fixed::<25>(s)?;
            let q = |i: usize| Quaternion::new(v[i], v[i + 1], v[i + 2], v[i + 3]);
            Some(Transport { map: parse_map(&v[..17])?, u: q(17), v: q(21) })
        }
    };
    let spec = BasisSpec { family, theta: h.float("theta")?, degree: h.int("degree")?, transport };
    let n: usize = h.int("n")?;
    if n != spec.len() {
        return Err(header_err(format!("n = {n} does not match the basis size {}", spec.len())));
    }
    let recs = read_records(&mut r, 2 * n * n, 4, Encoding::Binary)?;
    let q: Vec<Quaternion> = recs.into_iter().map(|v| Quaternion::new(v[0], v[1], v[2], v[3])).collect();
    let (gram, coeffs) = q.split_at(n * n);
    Ok(DiscreteKernel {
        spec,
        weight: parse_weight(h.get("weight")?)?,
        rule: parse_descriptor(&h)?,
        gram: gram.to_vec(),
        coeffs: coeffs.to_vec(),
        cond: h.float("cond")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperbergman_core::bergman::{gram, kernel};
    use hyperbergman_core::quadrature::{ball4_polar_rule, ball4_volume_rule, punctured_ball_rule, sphere3_surface_rule};

    fn round_trip_volume(rule: &VolumeRule, enc: Encoding) -> VolumeRule {
        let mut buf = Vec::new();
        write_volume_rule(&mut buf, rule, enc).unwrap();
        read_volume_rule(&buf[..]).unwrap()
    }

    #[test]
    fn volume_rules_round_trip_exactly() {
        let ball = ball4_volume_rule(ThetaPoint::new(0.1, 0.0, -0.2, 0.3), 0.7, 1).unwrap();
        let polar = ball4_polar_rule(ThetaPoint::ORIGIN, 1.0, ThetaPoint::new(0.2, 0.1, 0.0, 0.0), 0.05, 1).unwrap();
        let punctured = punctured_ball_rule(&ball, ThetaPoint::new(0.1, 0.0, -0.2, 0.3), 0.2).unwrap();
        for rule in [ball, polar, punctured] {
            for enc in [Encoding::Text, Encoding::Binary] {
                assert_eq!(round_trip_volume(&rule, enc), rule);
            }
        }
    }

    #[test]
    fn surface_rule_round_trips_exactly() {
        let s = sphere3_surface_rule(ThetaPoint::new(0.0, 0.5, 0.0, 0.0), 0.8, 1).unwrap();
        for enc in [Encoding::Text, Encoding::Binary] {
            let mut buf = Vec::new();
            write_surface_rule(&mut buf, &s, enc).unwrap();
            assert_eq!(read_surface_rule(&buf[..]).unwrap(), s);
        }
    }

    #[test]
    fn binary_records_are_little_endian_f64() {
        let rule = ball4_volume_rule(ThetaPoint::ORIGIN, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        write_volume_rule(&mut buf, &rule, Encoding::Binary).unwrap();
        let body = &buf[buf.len() - 40 * rule.len()..];
        let w0 = f64::from_le_bytes(body[32..40].try_into().unwrap());
        assert_eq!(w0, rule.weights[0]);
    }

    #[test]
    fn kernels_round_trip_exactly() {
        let rule = ball4_volume_rule(ThetaPoint::ORIGIN, 1.0, 1).unwrap();
        let u = Quaternion::new(0.3, -0.1, 0.2, 0.0);
        let map = MoebiusMap::affine(Quaternion::new(1.2, 0.1, 0.0, 0.0), Quaternion::ZERO, Quaternion::ONE).unwrap();
        let specs = [
            (BasisSpec::theta_u(u, 0.4, 2), Weight::Lambda(u)),
            (BasisSpec::alpha_beta(Complex64::new(0.1, 0.2), Complex64::new(0.0, -0.3), 0.4, 2), Weight::Unit),
            (
                BasisSpec::theta_u(u, 0.4, 1).with_transport(Transport { map, u, v: Quaternion::ZERO }),
                Weight::Gamma { map, u, v: Quaternion::ZERO },
            ),
        ];
        for (spec, weight) in specs {
            let k = kernel(&gram(&spec, &rule, &weight).unwrap()).unwrap();
            let mut buf = Vec::new();
            write_kernel(&mut buf, &k).unwrap();
            assert_eq!(read_kernel(&buf[..]).unwrap(), k);
        }
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(matches!(read_volume_rule(&b"not a rule\n"[..]), Err(FormatError::Header(_))));
        let rule = ball4_volume_rule(ThetaPoint::ORIGIN, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        write_volume_rule(&mut buf, &rule, Encoding::Binary).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_volume_rule(&buf[..]), Err(FormatError::Record { .. })));
        let mut s = Vec::new();
        write_surface_rule(&mut s, &sphere3_surface_rule(ThetaPoint::ORIGIN, 1.0, 1).unwrap(), Encoding::Text).unwrap();
        assert!(read_volume_rule(&s[..]).is_err());
    }
}
