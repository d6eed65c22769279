//! Parameter grids written as `start:stop:count` on the command line.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("empty grid")]
    Empty,
    #[error("grid `{0}` must be `start:stop:count` or a single value")]
    Shape(String),
    #[error("grid `{text}`: cannot parse `{field}` as a number")]
    Number { text: String, field: String },
    #[error("grid `{0}`: count must be at least 1")]
    ZeroCount(String),
    #[error("grid `{0}`: a single point needs start == stop")]
    SinglePoint(String),
    #[error("grid `{0}`: step must be positive and finite")]
    Step(String),
    #[error("grid `{0}`: step does not divide the interval")]
    Uneven(String),
}

/// Parses a grid.
///
/// * `x` is the one-point grid `[x]`.
/// * `a:b:n` with an integer `n` gives `n` evenly spaced points including
///   both endpoints.
/// * `a:b:h` with a fractional `h` is read as a step; `|b − a|` must be a
///   whole multiple of `h`.
///
/// Endpoints are reproduced exactly.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, GridError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(GridError::Empty);
    }
    let fields: Vec<&str> = trimmed.split(':').map(str::trim).collect();
    let number = |field: &str| -> Result<f64, GridError> {
        field
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GridError::Number {
                text: trimmed.to_string(),
                field: field.to_string(),
            })
    };
    match fields.as_slice() {
        [single] => Ok(vec![number(single)?]),
        [start, stop, third] => {
            let (start, stop) = (number(start)?, number(stop)?);
            let count = if let Ok(count) = third.parse::<usize>() {
                count
            } else {
                let step = number(third)?;
                if !(step > 0.0) {
                    return Err(GridError::Step(trimmed.to_string()));
                }
                let intervals = (stop - start).abs() / step;
                let rounded = intervals.round();
                if (intervals - rounded).abs() > 1e-9 * rounded.max(1.0) {
                    return Err(GridError::Uneven(trimmed.to_string()));
                }
                rounded as usize + 1
            };
            match count {
                0 => Err(GridError::ZeroCount(trimmed.to_string())),
                1 if start == stop => Ok(vec![start]),
                1 => Err(GridError::SinglePoint(trimmed.to_string())),
                _ => Ok(linspace(start, stop, count)),
            }
        }
        _ => Err(GridError::Shape(trimmed.to_string())),
    }
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let last = count - 1;
    (0..count)
        .map(|k| {
            if k == last {
                stop
            } else {
                start + (stop - start) * (k as f64 / last as f64)
            }
        })
        .collect()
}
