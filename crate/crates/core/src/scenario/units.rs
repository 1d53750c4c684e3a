//! Physical quantities with unit suffixes, e.g. `12.5 MPa` or `360 mm`.

use std::fmt;

/// Physical dimension of a configuration value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Dimensionless,
    Pressure,
    Temperature,
    /// Kelvin without offset (differences, activation temperatures).
    TemperatureDifference,
    Time,
    Length,
    Permeability,
    /// mol·m⁻²·Pa⁻¹·s⁻¹
    RateConstant,
    /// m²·m⁻³
    SpecificArea,
    /// J·mol⁻¹
    MolarEnergy,
    /// J·mol⁻¹·K⁻¹
    MolarEntropy,
    /// J·kg⁻¹·K⁻¹
    SpecificHeat,
    /// W·m⁻¹·K⁻¹
    Conductivity,
    Density,
    Acceleration,
    /// Pa⁻¹
    Compliance,
    /// m²·s⁻¹
    Diffusivity,
    MolarMass,
}

/// `si = value · scale + offset`
#[derive(Debug, Clone, Copy)]
struct Unit {
    symbol: &'static str,
    scale: f64,
    offset: f64,
}

macro_rules! u {
    ($symbol:expr, $scale:expr) => {
        Unit {
            symbol: $symbol,
            scale: $scale,
            offset: 0.0,
        }
    };
}

impl Dim {
    /// Accepted units; the first one is SI.
    fn units(self) -> &'static [Unit] {
        use Dim::*;
        match self {
            Dimensionless => &[u!("-", 1.0)],
            Pressure => &[u!("Pa", 1.0), u!("MPa", 1e6), u!("kPa", 1e3), u!("GPa", 1e9), u!("bar", 1e5)],
            Temperature => &[
                u!("K", 1.0),
                Unit {
                    symbol: "degC",
                    scale: 1.0,
                    offset: 273.15,
                },
            ],
            TemperatureDifference => &[u!("K", 1.0)],
            Time => &[u!("s", 1.0), u!("min", 60.0), u!("h", 3600.0), u!("d", 86400.0)],
            Length => &[u!("m", 1.0), u!("mm", 1e-3), u!("cm", 1e-2)],
            Permeability => &[u!("m2", 1.0), u!("D", 9.869_233e-13), u!("mD", 9.869_233e-16)],
            RateConstant => &[u!("mol/(m2.Pa.s)", 1.0)],
            SpecificArea => &[u!("1/m", 1.0), u!("m2/m3", 1.0)],
            MolarEnergy => &[u!("J/mol", 1.0), u!("kJ/mol", 1e3)],
            MolarEntropy => &[u!("J/(mol.K)", 1.0)],
            SpecificHeat => &[u!("J/(kg.K)", 1.0), u!("kJ/(kg.K)", 1e3)],
            Conductivity => &[u!("W/(m.K)", 1.0)],
            Density => &[u!("kg/m3", 1.0), u!("g/cm3", 1e3)],
            Acceleration => &[u!("m/s2", 1.0)],
            Compliance => &[u!("1/Pa", 1.0), u!("1/MPa", 1e-6)],
            Diffusivity => &[u!("m2/s", 1.0)],
            MolarMass => &[u!("kg/mol", 1.0), u!("g/mol", 1e-3)],
        }
    }

    pub fn si_symbol(self) -> &'static str {
        self.units()[0].symbol
    }

    /// Unit used when writing values.
    fn preferred(self) -> Unit {
        let units = self.units();
        match self {
            Dim::Pressure | Dim::Length => units[1],
            _ => units[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn parse_number(text: &str) -> Result<f64, UnitError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| UnitError(format!("`{}` is not a number", text.trim())))?;
    if !v.is_finite() {
        return Err(UnitError(format!("`{}` is not finite", text.trim())));
    }
    Ok(v)
}

/// Split `"<number> <unit>"`; the unit is optional.
fn split_unit(text: &str) -> (&str, &str) {
    let t = text.trim();
    match t.find(char::is_whitespace) {
        Some(k) => (&t[..k], t[k..].trim()),
        None => (t, ""),
    }
}

fn lookup(dim: Dim, symbol: &str) -> Result<Unit, UnitError> {
    if symbol.is_empty() {
        return match dim {
            Dim::Dimensionless => Ok(u!("-", 1.0)),
            _ => Err(UnitError(format!("missing unit, expected one of {}", unit_list(dim)))),
        };
    }
    dim.units()
        .iter()
        .find(|u| u.symbol == symbol)
        .copied()
        .ok_or_else(|| UnitError(format!("unknown unit `{symbol}`, expected one of {}", unit_list(dim))))
}

fn unit_list(dim: Dim) -> String {
    dim.units().iter().map(|u| u.symbol).collect::<Vec<_>>().join(", ")
}

/// Parse a scalar with unit and convert to SI.
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64, UnitError> {
    let (num, sym) = split_unit(text);
    let unit = lookup(dim, sym)?;
    Ok(parse_number(num)? * unit.scale + unit.offset)
}

/// Parse `v` or `[v1, v2, …]` followed by one unit for all entries.
pub fn parse_quantity_list(text: &str, dim: Dim) -> Result<Vec<f64>, UnitError> {
    let t = text.trim();
    let Some(rest) = t.strip_prefix('[') else {
        return Ok(vec![parse_quantity(t, dim)?]);
    };
    let close = rest.find(']').ok_or_else(|| UnitError("unterminated `[`".into()))?;
    let unit = lookup(dim, rest[close + 1..].trim())?;
    rest[..close]
        .split(',')
        .map(|s| Ok(parse_number(s)? * unit.scale + unit.offset))
        .collect()
}

/// Shortest text that parses back to exactly `v`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// The preferred unit when it converts back exactly, SI otherwise.
fn display_unit(v: f64, dim: Dim) -> (f64, Unit) {
    let p = dim.preferred();
    let shown = (v - p.offset) / p.scale;
    let back = format_number(shown).parse::<f64>().map(|s| s * p.scale + p.offset);
    if back == Ok(v) {
        (shown, p)
    } else {
        (v, dim.units()[0])
    }
}

pub fn format_quantity(v: f64, dim: Dim) -> String {
    if dim == Dim::Dimensionless {
        return format_number(v);
    }
    let (shown, unit) = display_unit(v, dim);
    format!("{} {}", format_number(shown), unit.symbol)
}

pub fn format_quantity_list(values: &[f64], dim: Dim) -> String {
    if let [v] = values {
        return format_quantity(*v, dim);
    }
    let unit = if dim == Dim::Dimensionless || values.iter().any(|&v| display_unit(v, dim).1.symbol != dim.preferred().symbol) {
        dim.units()[0]
    } else {
        dim.preferred()
    };
    let body: Vec<String> = values
        .iter()
        .map(|&v| format_number((v - unit.offset) / unit.scale))
        .collect();
    if dim == Dim::Dimensionless {
        format!("[{}]", body.join(", "))
    } else {
        format!("[{}] {}", body.join(", "), unit.symbol)
    }
}
