use pyo3::prelude::*;

#[pymodule]
fn klevel_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
