//! Fresh-sample oracles.
//!
//! The learner only ever asks for "the next `n` samples". A
//! [`StreamSource`] generates them on demand from a [`ProblemSpec`], which
//! gives every stage genuinely fresh data; a [`DatasetSource`] hands out
//! consecutive slices of a fixed dataset and fails once it runs dry.

use crate::error::{Error, Result};
use crate::synthetic::{generate_range, Dataset, ProblemSpec};

pub trait SampleSource {
    fn dim(&self) -> usize;

    /// The next `n` samples, in order.
    fn draw(&mut self, n: usize) -> Result<Dataset>;

    /// Total number of samples handed out so far.
    fn drawn(&self) -> usize;
}

impl<S: SampleSource + ?Sized> SampleSource for &mut S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn draw(&mut self, n: usize) -> Result<Dataset> {
        (**self).draw(n)
    }

    fn drawn(&self) -> usize {
        (**self).drawn()
    }
}

/// On-demand generation: the `k`-th sample ever drawn is sample `k` of the
/// problem's sequence, so draws of any sizes concatenate to `generate`.
#[derive(Debug, Clone)]
pub struct StreamSource {
    spec: ProblemSpec,
    drawn: usize,
}

impl StreamSource {
    pub fn new(spec: ProblemSpec) -> Self {
        Self { spec, drawn: 0 }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }
}

impl SampleSource for StreamSource {
    fn dim(&self) -> usize {
        self.spec.d
    }

    fn draw(&mut self, n: usize) -> Result<Dataset> {
        let out = generate_range(&self.spec, self.drawn as u64, n);
        self.drawn += n;
        Ok(out)
    }

    fn drawn(&self) -> usize {
        self.drawn
    }
}

/// Consecutive, non-overlapping slices of a fixed dataset.
#[derive(Debug, Clone)]
pub struct DatasetSource {
    data: Dataset,
    next: usize,
}

impl DatasetSource {
    pub fn new(data: Dataset) -> Self {
        Self { data, next: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.next
    }
}

impl SampleSource for DatasetSource {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn draw(&mut self, n: usize) -> Result<Dataset> {
        if n > self.remaining() {
            return Err(Error::InsufficientData {
                requested: n,
                available: self.remaining(),
            });
        }
        let out = self.data.slice(self.next, n);
        self.next += n;
        Ok(out)
    }

    fn drawn(&self) -> usize {
        self.next
    }
}

/// Wraps a source and negates every label it returns.
#[derive(Debug)]
pub struct NegatedLabels<S> {
    inner: S,
}

impl<S: SampleSource> NegatedLabels<S> {
    pub fn new(inner: S) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: SampleSource> SampleSource for NegatedLabels<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn draw(&mut self, n: usize) -> Result<Dataset> {
        let mut out = self.inner.draw(n)?;
        out.negate_labels();
        Ok(out)
    }

    fn drawn(&self) -> usize {
        self.inner.drawn()
    }
}

/// Either the source itself or its label-negated view, decided at run time.
pub(crate) enum MaybeNegated<'a, S: SampleSource + ?Sized> {
    Plain(&'a mut S),
    Negated(&'a mut S),
}

impl<S: SampleSource + ?Sized> SampleSource for MaybeNegated<'_, S> {
    fn dim(&self) -> usize {
        match self {
            MaybeNegated::Plain(s) | MaybeNegated::Negated(s) => s.dim(),
        }
    }

    fn draw(&mut self, n: usize) -> Result<Dataset> {
        match self {
            MaybeNegated::Plain(s) => s.draw(n),
            MaybeNegated::Negated(s) => {
                let mut out = s.draw(n)?;
                out.negate_labels();
                Ok(out)
            }
        }
    }

    fn drawn(&self) -> usize {
        match self {
            MaybeNegated::Plain(s) | MaybeNegated::Negated(s) => s.drawn(),
        }
    }
}
