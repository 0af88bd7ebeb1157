//! Line-oriented experiment configuration.
//!
//! The format is plain `key = value` lines grouped under `[section]`
//! headers, with `#` comments and blank lines ignored:
//!
//! ```text
//! [domain]
//! shape = disc
//! radius = 1.0
//!
//! [problem]
//! m = 2
//! alpha = 0 0
//! f = constant 1.0
//!
//! [grid]
//! n_cells = 64
//!
//! [solve]
//! picard_tol = 1e-10
//! cg_tol = 1e-12
//! omega = 1.0
//!
//! [verify]
//! sweep = true
//! tol = 1e-8
//! barrier = 0.5 0.1 2.0
//! singular = false
//! ```
//!
//! Required keys are `shape`, `m`, `alpha`, `f`, and `n_cells`; everything
//! else has defaults. Parse errors carry the 1-based line number; missing
//! required keys are reported as file-level errors. The sweep tolerance is
//! relative: it multiplies the sup norm of the first solution component.

use std::path::Path;

use crate::error::Error;
use crate::geometry::{DomainSpec, Shape};
use crate::solver::{Nonlinearity, SolveConfig};
use crate::symcoeffs::AlphaVector;

/// Fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    /// Number of cascade components m.
    pub order: usize,
    pub alpha: AlphaVector,
    pub nonlinearity: Nonlinearity,
    pub n_cells: u32,
    pub solve: SolveConfig,
    /// Run the plane descent after the solve.
    pub run_sweep: bool,
    /// Relative descent tolerance (multiplies sup |u_1|).
    pub sweep_tol: f64,
    /// Barrier experiment parameters (exponent, radius, zero-order
    /// coefficient), when requested.
    pub barrier: Option<(f64, f64, f64)>,
    /// Inject the disc Green function and sweep it.
    pub run_singular: bool,
    /// The run is expected to break symmetry (defaults to true exactly for
    /// the shifted-disc shape).
    pub negative_control: bool,
}

fn file_level(message: String) -> Error {
    Error::Config { line: 0, message }
}

fn at_line(line: usize, message: String) -> Error {
    Error::Config { line, message }
}

fn parse_float(line: usize, key: &str, value: &str) -> Result<f64, Error> {
    value.parse::<f64>().map_err(|_| {
        at_line(line, format!("expected a number for '{}', got '{}'", key, value))
    })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, Error> {
    value.parse::<usize>().map_err(|_| {
        at_line(
            line,
            format!("expected a nonnegative integer for '{}', got '{}'", key, value),
        )
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(at_line(
            line,
            format!("expected true or false for '{}', got '{}'", key, other),
        )),
    }
}

fn parse_float_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, Error> {
    value
        .split_whitespace()
        .map(|tok| parse_float(line, key, tok))
        .collect()
}

fn parse_nonlinearity(line: usize, value: &str) -> Result<Nonlinearity, Error> {
    let mut tokens = value.split_whitespace();
    let kind = tokens
        .next()
        .ok_or_else(|| at_line(line, "'f' needs a kind and parameters".to_string()))?;
    let params: Vec<f64> = tokens
        .map(|tok| parse_float(line, "f", tok))
        .collect::<Result<_, _>>()?;
    let arity_error = |expected: usize| {
        at_line(
            line,
            format!(
                "source kind '{}' takes {} parameter(s), got {}",
                kind,
                expected,
                params.len()
            ),
        )
    };
    match kind {
        "constant" => match params[..] {
            [value] => Ok(Nonlinearity::Constant { value }),
            _ => Err(arity_error(1)),
        },
        "affine" => match params[..] {
            [offset, slope] => Ok(Nonlinearity::Affine { offset, slope }),
            _ => Err(arity_error(2)),
        },
        "saturating" => match params[..] {
            [offset, slope, cap] => Ok(Nonlinearity::Saturating { offset, slope, cap }),
            _ => Err(arity_error(3)),
        },
        "arctan" => match params[..] {
            [offset, slope] => Ok(Nonlinearity::Arctan { offset, slope }),
            _ => Err(arity_error(2)),
        },
        other => Err(at_line(
            line,
            format!(
                "unknown source kind '{}' (expected constant, affine, saturating, or arctan)",
                other
            ),
        )),
    }
}

/// One recorded shape parameter with its source line for late validation.
#[derive(Debug, Clone, Copy)]
struct ShapeParam {
    line: usize,
    value: f64,
}

#[derive(Debug, Default)]
struct DomainSection {
    shape: Option<(usize, String)>,
    radius: Option<ShapeParam>,
    semi_x1: Option<ShapeParam>,
    semi_x2: Option<ShapeParam>,
    half_length: Option<ShapeParam>,
    cap_radius: Option<ShapeParam>,
    disc_radius: Option<ShapeParam>,
    center_offset: Option<ShapeParam>,
    center_x1: Option<ShapeParam>,
}

impl DomainSection {
    fn assemble(self) -> Result<Shape, Error> {
        let (line, name) = self
            .shape
            .ok_or_else(|| file_level("missing required key 'shape' in [domain]".to_string()))?;
        let take = |param: Option<ShapeParam>, default: f64| param.map_or(default, |p| p.value);
        let reject = |param: Option<ShapeParam>, key: &str| -> Result<(), Error> {
            match param {
                Some(p) => Err(at_line(
                    p.line,
                    format!("key '{}' does not apply to shape '{}'", key, name),
                )),
                None => Ok(()),
            }
        };
        let shape = match name.as_str() {
            "disc" => {
                reject(self.semi_x1, "semi_x1")?;
                reject(self.semi_x2, "semi_x2")?;
                reject(self.half_length, "half_length")?;
                reject(self.cap_radius, "cap_radius")?;
                reject(self.disc_radius, "disc_radius")?;
                reject(self.center_offset, "center_offset")?;
                reject(self.center_x1, "center_x1")?;
                Shape::Disc {
                    radius: take(self.radius, 1.0),
                }
            }
            "ellipse" => {
                reject(self.radius, "radius")?;
                reject(self.half_length, "half_length")?;
                reject(self.cap_radius, "cap_radius")?;
                reject(self.disc_radius, "disc_radius")?;
                reject(self.center_offset, "center_offset")?;
                reject(self.center_x1, "center_x1")?;
                Shape::Ellipse {
                    semi_x1: take(self.semi_x1, 1.0),
                    semi_x2: take(self.semi_x2, 0.7),
                }
            }
            "stadium" => {
                reject(self.radius, "radius")?;
                reject(self.semi_x1, "semi_x1")?;
                reject(self.semi_x2, "semi_x2")?;
                reject(self.disc_radius, "disc_radius")?;
                reject(self.center_offset, "center_offset")?;
                reject(self.center_x1, "center_x1")?;
                Shape::Stadium {
                    half_length: take(self.half_length, 0.5),
                    cap_radius: take(self.cap_radius, 0.5),
                }
            }
            "lens" => {
                reject(self.radius, "radius")?;
                reject(self.semi_x1, "semi_x1")?;
                reject(self.semi_x2, "semi_x2")?;
                reject(self.half_length, "half_length")?;
                reject(self.cap_radius, "cap_radius")?;
                reject(self.center_x1, "center_x1")?;
                Shape::Lens {
                    disc_radius: take(self.disc_radius, 1.5),
                    center_offset: take(self.center_offset, 0.5),
                }
            }
            "shifted-disc" => {
                reject(self.semi_x1, "semi_x1")?;
                reject(self.semi_x2, "semi_x2")?;
                reject(self.half_length, "half_length")?;
                reject(self.cap_radius, "cap_radius")?;
                reject(self.disc_radius, "disc_radius")?;
                reject(self.center_offset, "center_offset")?;
                Shape::ShiftedDisc {
                    radius: take(self.radius, 0.7),
                    center_x1: take(self.center_x1, 0.3),
                }
            }
            other => {
                return Err(at_line(
                    line,
                    format!(
                        "unknown shape '{}' (expected disc, ellipse, stadium, lens, or shifted-disc)",
                        other
                    ),
                ))
            }
        };
        Ok(shape)
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut domain = DomainSection::default();
        let mut order: Option<usize> = None;
        let mut alpha: Option<(usize, Vec<f64>)> = None;
        let mut nonlinearity: Option<Nonlinearity> = None;
        let mut n_cells: Option<(usize, usize)> = None;
        let mut solve = SolveConfig::default();
        let mut run_sweep = true;
        let mut sweep_tol = 1e-8;
        let mut barrier: Option<(f64, f64, f64)> = None;
        let mut run_singular = false;
        let mut negative_control: Option<bool> = None;

        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('[') {
                let name = header.strip_suffix(']').ok_or_else(|| {
                    at_line(line, format!("unterminated section header '{}'", trimmed))
                })?;
                match name {
                    "domain" | "problem" | "grid" | "solve" | "verify" => {
                        section = Some(name.to_string());
                    }
                    other => {
                        return Err(at_line(line, format!("unknown section '[{}]'", other)))
                    }
                }
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                at_line(line, format!("expected 'key = value', got '{}'", trimmed))
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_deref().ok_or_else(|| {
                at_line(line, format!("key '{}' appears before any [section]", key))
            })?;

            match (section, key) {
                ("domain", "shape") => domain.shape = Some((line, value.to_string())),
                ("domain", param_key) => {
                    let slot = match param_key {
                        "radius" => &mut domain.radius,
                        "semi_x1" => &mut domain.semi_x1,
                        "semi_x2" => &mut domain.semi_x2,
                        "half_length" => &mut domain.half_length,
                        "cap_radius" => &mut domain.cap_radius,
                        "disc_radius" => &mut domain.disc_radius,
                        "center_offset" => &mut domain.center_offset,
                        "center_x1" => &mut domain.center_x1,
                        other => {
                            return Err(at_line(
                                line,
                                format!("unknown key '{}' in [domain]", other),
                            ))
                        }
                    };
                    *slot = Some(ShapeParam {
                        line,
                        value: parse_float(line, param_key, value)?,
                    });
                }
                ("problem", "m") => {
                    let m = parse_usize(line, "m", value)?;
                    if m < 1 {
                        return Err(at_line(line, "m must be at least 1".to_string()));
                    }
                    order = Some(m);
                }
                ("problem", "alpha") => {
                    alpha = Some((line, parse_float_list(line, "alpha", value)?))
                }
                ("problem", "f") => nonlinearity = Some(parse_nonlinearity(line, value)?),
                ("problem", other) => {
                    return Err(at_line(line, format!("unknown key '{}' in [problem]", other)))
                }
                ("grid", "n_cells") => {
                    let n = parse_usize(line, "n_cells", value)?;
                    if n < 8 {
                        return Err(at_line(
                            line,
                            format!("n_cells must be at least 8, got {}", n),
                        ));
                    }
                    n_cells = Some((line, n));
                }
                ("grid", other) => {
                    return Err(at_line(line, format!("unknown key '{}' in [grid]", other)))
                }
                ("solve", "picard_tol") => {
                    solve.picard_tol = parse_float(line, "picard_tol", value)?;
                    if !(solve.picard_tol > 0.0) {
                        return Err(at_line(line, "picard_tol must be positive".to_string()));
                    }
                }
                ("solve", "cg_tol") => {
                    solve.cg_tol = parse_float(line, "cg_tol", value)?;
                    if !(solve.cg_tol > 0.0) {
                        return Err(at_line(line, "cg_tol must be positive".to_string()));
                    }
                }
                ("solve", "omega") => {
                    solve.omega = parse_float(line, "omega", value)?;
                    if !(solve.omega > 0.0 && solve.omega <= 1.0) {
                        return Err(at_line(line, "omega must lie in (0, 1]".to_string()));
                    }
                }
                ("solve", "picard_max_iter") => {
                    solve.picard_max_iter = parse_usize(line, "picard_max_iter", value)?
                }
                ("solve", "cg_max_iter") => {
                    solve.cg_max_iter = parse_usize(line, "cg_max_iter", value)?
                }
                ("solve", other) => {
                    return Err(at_line(line, format!("unknown key '{}' in [solve]", other)))
                }
                ("verify", "sweep") => run_sweep = parse_bool(line, "sweep", value)?,
                ("verify", "tol") => {
                    sweep_tol = parse_float(line, "tol", value)?;
                    if !(sweep_tol > 0.0) {
                        return Err(at_line(line, "tol must be positive".to_string()));
                    }
                }
                ("verify", "barrier") => {
                    if value == "false" {
                        barrier = None;
                    } else {
                        let params = parse_float_list(line, "barrier", value)?;
                        match params[..] {
                            [a, r, k] => barrier = Some((a, r, k)),
                            _ => {
                                return Err(at_line(
                                    line,
                                    format!(
                                        "barrier takes three numbers (exponent, radius, zero-order), got {}",
                                        params.len()
                                    ),
                                ))
                            }
                        }
                    }
                }
                ("verify", "singular") => run_singular = parse_bool(line, "singular", value)?,
                ("verify", "negative_control") => {
                    negative_control = Some(parse_bool(line, "negative_control", value)?)
                }
                ("verify", other) => {
                    return Err(at_line(line, format!("unknown key '{}' in [verify]", other)))
                }
                _ => unreachable!("section names are validated at the header"),
            }
        }

        let shape = domain.assemble()?;
        let order =
            order.ok_or_else(|| file_level("missing required key 'm' in [problem]".to_string()))?;
        let (alpha_line, alpha_values) = alpha
            .ok_or_else(|| file_level("missing required key 'alpha' in [problem]".to_string()))?;
        if alpha_values.len() != order {
            return Err(at_line(
                alpha_line,
                format!(
                    "alpha has {} entries but m = {}",
                    alpha_values.len(),
                    order
                ),
            ));
        }
        let alpha = AlphaVector::new(alpha_values)
            .map_err(|e| at_line(alpha_line, format!("invalid alpha: {}", e)))?;
        let nonlinearity = nonlinearity
            .ok_or_else(|| file_level("missing required key 'f' in [problem]".to_string()))?;
        let (_, n_cells) = n_cells
            .ok_or_else(|| file_level("missing required key 'n_cells' in [grid]".to_string()))?;

        let negative_control = negative_control.unwrap_or_else(|| shape.is_negative_control());

        Ok(ExperimentConfig {
            domain: DomainSpec::new(shape),
            order,
            alpha,
            nonlinearity,
            n_cells: n_cells as u32,
            solve,
            run_sweep,
            sweep_tol,
            barrier,
            run_singular,
            negative_control,
        })
    }

    /// Key-value lines describing the parsed configuration, for reports.
    pub fn summary_lines(&self) -> Vec<String> {
        let alpha = self
            .alpha
            .values()
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let mut lines = vec![
            format!("shape = {}", self.domain.shape.describe()),
            format!("m = {}", self.order),
            format!("alpha = {}", alpha),
            format!("f = {}", self.nonlinearity.describe()),
            format!("n_cells = {}", self.n_cells),
            format!("picard_tol = {}", self.solve.picard_tol),
            format!("cg_tol = {}", self.solve.cg_tol),
            format!("omega = {}", self.solve.omega),
            format!("sweep = {}", self.run_sweep),
            format!("sweep_tol (relative) = {}", self.sweep_tol),
        ];
        match self.barrier {
            Some((a, r, k)) => lines.push(format!("barrier = a={} r={} k={}", a, r, k)),
            None => lines.push("barrier = off".to_string()),
        }
        lines.push(format!("singular_profile = {}", self.run_singular));
        lines.push(format!("negative_control = {}", self.negative_control));
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# flagship run
[domain]
shape = disc
radius = 1.0

[problem]
m = 2
alpha = 0 0
f = constant 1.0

[grid]
n_cells = 64

[solve]
picard_tol = 1e-10
cg_tol = 1e-12
omega = 1.0

[verify]
sweep = true
tol = 1e-8
barrier = 0.5 0.1 2.0
singular = false
";

    #[test]
    fn full_config_round_trips_every_field() {
        let cfg = ExperimentConfig::parse(FULL).unwrap();
        assert_eq!(cfg.domain.shape, Shape::Disc { radius: 1.0 });
        assert_eq!(cfg.order, 2);
        assert_eq!(cfg.alpha.values(), &[0.0, 0.0]);
        assert_eq!(cfg.nonlinearity, Nonlinearity::Constant { value: 1.0 });
        assert_eq!(cfg.n_cells, 64);
        assert_eq!(cfg.solve.picard_tol, 1e-10);
        assert_eq!(cfg.solve.cg_tol, 1e-12);
        assert_eq!(cfg.solve.omega, 1.0);
        assert!(cfg.run_sweep);
        assert_eq!(cfg.sweep_tol, 1e-8);
        assert_eq!(cfg.barrier, Some((0.5, 0.1, 2.0)));
        assert!(!cfg.run_singular);
        assert!(!cfg.negative_control);
    }

    #[test]
    fn minimal_config_fills_in_defaults() {
        let cfg = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nm = 1\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 16\n",
        )
        .unwrap();
        assert_eq!(cfg.solve.picard_tol, SolveConfig::default().picard_tol);
        assert!(cfg.run_sweep, "sweep defaults on");
        assert_eq!(cfg.sweep_tol, 1e-8);
        assert_eq!(cfg.barrier, None);
        assert!(!cfg.run_singular);
        assert!(!cfg.negative_control);
    }

    #[test]
    fn shifted_disc_defaults_to_a_negative_control() {
        let cfg = ExperimentConfig::parse(
            "[domain]\nshape = shifted-disc\n[problem]\nm = 1\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 16\n",
        )
        .unwrap();
        assert_eq!(
            cfg.domain.shape,
            Shape::ShiftedDisc {
                radius: 0.7,
                center_x1: 0.3
            }
        );
        assert!(cfg.negative_control);
    }

    #[test]
    fn missing_required_keys_are_named() {
        let err = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 16\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("'m'"), "got: {}", err);
        let err = ExperimentConfig::parse("[problem]\nm = 1\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 16\n")
            .unwrap_err();
        assert!(err.to_string().contains("'shape'"), "got: {}", err);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ExperimentConfig::parse("[domain]\nshape = disc\nradius = fast\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 3"), "got: {}", text);
        assert!(text.contains("radius"), "got: {}", text);

        let err = ExperimentConfig::parse("[domain]\nshape = disc\nwobble = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "got: {}", err);

        let err = ExperimentConfig::parse("shape = disc\n").unwrap_err();
        assert!(
            err.to_string().contains("before any [section]"),
            "got: {}",
            err
        );

        let err = ExperimentConfig::parse("[nonsense]\n").unwrap_err();
        assert!(err.to_string().contains("nonsense"), "got: {}", err);
    }

    #[test]
    fn alpha_length_must_match_m() {
        let err = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nm = 3\nalpha = 0 1\nf = constant 1\n[grid]\nn_cells = 16\n",
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 5"), "got: {}", text);
        assert!(text.contains("m = 3"), "got: {}", text);
    }

    #[test]
    fn structural_bounds_are_enforced() {
        let coarse = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nm = 1\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 4\n",
        )
        .unwrap_err();
        assert!(coarse.to_string().contains("n_cells"), "got: {}", coarse);

        let omega = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nm = 1\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 16\n[solve]\nomega = 0\n",
        )
        .unwrap_err();
        assert!(omega.to_string().contains("omega"), "got: {}", omega);

        let zero_m = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nm = 0\nalpha =\nf = constant 1\n[grid]\nn_cells = 16\n",
        )
        .unwrap_err();
        assert!(zero_m.to_string().contains("m must be"), "got: {}", zero_m);
    }

    #[test]
    fn source_kinds_check_their_arity() {
        let base = "[domain]\nshape = disc\n[problem]\nm = 1\nalpha = 0\n[grid]\nn_cells = 16\n";
        let ok = ExperimentConfig::parse(&format!("{}{}", base, "[problem]\nf = saturating 0.5 1 0.08\n"));
        assert!(matches!(
            ok.unwrap().nonlinearity,
            Nonlinearity::Saturating { .. }
        ));
        let err = ExperimentConfig::parse(&format!("{}{}", base, "[problem]\nf = arctan 1\n"))
            .unwrap_err();
        assert!(err.to_string().contains("arctan"), "got: {}", err);
        let err = ExperimentConfig::parse(&format!("{}{}", base, "[problem]\nf = cubic 1\n"))
            .unwrap_err();
        assert!(err.to_string().contains("cubic"), "got: {}", err);
    }

    #[test]
    fn shape_parameters_are_scoped_to_their_shape() {
        let err = ExperimentConfig::parse(
            "[domain]\nshape = ellipse\nradius = 1\n[problem]\nm = 1\nalpha = 0\nf = constant 1\n[grid]\nn_cells = 16\n",
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("does not apply"), "got: {}", text);
        assert!(text.contains("line 3"), "got: {}", text);
    }

    #[test]
    fn later_assignments_overwrite_earlier_ones() {
        let cfg = ExperimentConfig::parse(
            "[domain]\nshape = disc\n[problem]\nm = 1\nalpha = 0\nf = constant 1\nf = constant 2\n[grid]\nn_cells = 16\n",
        )
        .unwrap();
        assert_eq!(cfg.nonlinearity, Nonlinearity::Constant { value: 2.0 });
    }

    #[test]
    fn summary_lines_cover_the_run_shape() {
        let cfg = ExperimentConfig::parse(FULL).unwrap();
        let text = cfg.summary_lines().join("\n");
        assert!(text.contains("shape = disc radius=1"));
        assert!(text.contains("alpha = 0 0"));
        assert!(text.contains("barrier = a=0.5 r=0.1 k=2"));
    }
}
