use pyo3::prelude::*;
#[pymodule]
fn imstab_py(_m: &Bound<'_, PyModule>) -> PyResult<()> { Ok(()) }
