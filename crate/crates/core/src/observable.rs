use std::fmt;
use std::sync::Arc;

/// A named bounded real function of the state.
pub struct Observable<S> {
    name: String,
    f: Arc<dyn Fn(&S) -> f64 + Send + Sync>,
}

impl<S> Observable<S> {
    pub fn new(name: impl Into<String>, f: impl Fn(&S) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(name: impl Into<String>, c: f64) -> Self {
        Self::new(name, move |_| c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: &S) -> f64 {
        (self.f)(x)
    }
}

impl<S> Clone for Observable<S> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<S> fmt::Debug for Observable<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name)
    }
}

/// Adds every observable at `x` into `acc`.
#[inline]
pub fn accumulate<S>(observables: &[Observable<S>], x: &S, acc: &mut [f64]) {
    for (a, o) in acc.iter_mut().zip(observables) {
        *a += o.eval(x);
    }
}
