//! Float-to-text formatting shared by the curve, signature and model writers.

use crate::scalar::Real;

/// Formats with 17 significant digits, enough to round-trip `f64` (and,
/// a fortiori, `f32`) exactly through the text formats.
pub fn g17<T: Real>(x: T) -> String {
    format!("{:.16e}", x)
}

/// JSON formatter that writes every float with 17 significant digits, so
/// model files round-trip parameters bitwise. Everything else keeps the
/// compact default layout.
#[derive(Default)]
pub struct G17Formatter;

impl G17Formatter {
    pub fn new() -> Self {
        Self
    }
}

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{:.16e}", value as f64)
    }
}
