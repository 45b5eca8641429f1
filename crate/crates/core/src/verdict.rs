use std::fmt;

/// Outcome of cross-checking computed results against a brute-force recomputation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Counterexample),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// A failed check with every intermediate value needed to reproduce it.
///
/// The checked statements are theorems, so a counterexample always points at
/// an implementation defect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub check: String,
    pub state: Vec<(String, String)>,
}

impl Counterexample {
    pub fn new(check: impl Into<String>) -> Self {
        Counterexample {
            check: check.into(),
            state: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.state.push((key.into(), value.to_string()));
        self
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check `{}` failed", self.check)?;
        for (k, v) in &self.state {
            write!(f, "; {k} = {v}")?;
        }
        Ok(())
    }
}

/// Renders a slice as `[x, y, z]`.
pub(crate) fn list<T: fmt::Display>(items: &[T]) -> String {
    let inner: Vec<String> = items.iter().map(ToString::to_string).collect();
    format!("[{}]", inner.join(", "))
}
