//! File formats, report emission and the command-line interface.

pub mod cli;
pub mod plot;
pub mod report;
pub mod stack;

pub use plot::{format_plot_csv, parse_plot_csv, render_plot_svg, write_plot_csv, write_plot_svg, SvgPlot};
pub use report::{error_json, to_json_pretty};
pub use stack::{format_matrix_stack, parse_matrix_stack, read_matrix_stack, write_matrix_stack};

use crate::scalar::Scalar;

/// 17 significant digits in scientific notation.
pub fn format_float<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1 + 0.2, -1.0 / 3.0, 1e-300, f64::MAX, 0.0, 5e-324] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(1.5f64), "1.5000000000000000e0");
    }
}
