//! Lazily evaluated, memoized time slices of fields.
//!
//! Time-dependent objects (the evolving scalar, synthesized waves, stress
//! families) are represented as closures t ↦ slice with a small LRU cache
//! keyed by the exact bit pattern of t. Repeated evaluation at the same time
//! — the normal case, since defect probes and family assembly hit identical
//! stencil points — costs one hash lookup, and results are shared through
//! `Rc` rather than cloned.

use std::cell::RefCell;
use std::collections::HashMap;
use std::collections::VecDeque;
use std::rc::Rc;

use scalarforge_spectral::{Field, VectorField};

struct Cache<T> {
    cap: usize,
    map: HashMap<u64, Rc<T>>,
    order: VecDeque<u64>,
}

impl<T> Cache<T> {
    fn new(cap: usize) -> Self {
        Cache {
            cap: cap.max(1),
            map: HashMap::new(),
            order: VecDeque::new(),
        }
    }

    fn get(&mut self, key: u64) -> Option<Rc<T>> {
        let hit = self.map.get(&key).cloned();
        if hit.is_some() {
            if let Some(pos) = self.order.iter().position(|&k| k == key) {
                self.order.remove(pos);
                self.order.push_back(key);
            }
        }
        hit
    }

    fn put(&mut self, key: u64, val: Rc<T>) {
        if self.map.insert(key, val).is_none() {
            self.order.push_back(key);
        }
        while self.order.len() > self.cap {
            if let Some(old) = self.order.pop_front() {
                self.map.remove(&old);
            }
        }
    }
}

struct Inner<T> {
    f: Box<dyn Fn(f64) -> T>,
    cache: RefCell<Cache<T>>,
}

fn eval<T>(inner: &Inner<T>, t: f64) -> Rc<T> {
    let key = t.to_bits();
    if let Some(hit) = inner.cache.borrow_mut().get(key) {
        return hit;
    }
    let fresh = Rc::new((inner.f)(t));
    inner.cache.borrow_mut().put(key, fresh.clone());
    fresh
}

/// A memoized t ↦ scalar field map. Cloning shares the cache.
#[derive(Clone)]
pub struct TimeField(Rc<Inner<Field>>);

impl TimeField {
    pub fn new(cap: usize, f: impl Fn(f64) -> Field + 'static) -> Self {
        TimeField(Rc::new(Inner {
            f: Box::new(f),
            cache: RefCell::new(Cache::new(cap)),
        }))
    }

    /// A time-independent field.
    pub fn steady(field: Field) -> Self {
        TimeField::new(1, move |_| field.clone())
    }

    pub fn at(&self, t: f64) -> Rc<Field> {
        eval(&self.0, t)
    }
}

/// A memoized t ↦ vector field map. Cloning shares the cache.
#[derive(Clone)]
pub struct TimeVec(Rc<Inner<VectorField>>);

impl TimeVec {
    pub fn new(cap: usize, f: impl Fn(f64) -> VectorField + 'static) -> Self {
        TimeVec(Rc::new(Inner {
            f: Box::new(f),
            cache: RefCell::new(Cache::new(cap)),
        }))
    }

    pub fn steady(v: VectorField) -> Self {
        TimeVec::new(1, move |_| v.clone())
    }

    pub fn at(&self, t: f64) -> Rc<VectorField> {
        eval(&self.0, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalarforge_spectral::Grid;
    use std::cell::Cell;

    #[test]
    fn caches_by_exact_time_and_evicts_lru() {
        let grid = Grid::new(8).unwrap();
        let calls = Rc::new(Cell::new(0usize));
        let counter = calls.clone();
        let tf = TimeField::new(2, move |t| {
            counter.set(counter.get() + 1);
            Field::from_real_point_fn(grid, |x| t * x[0])
        });
        let a = tf.at(0.25);
        let b = tf.at(0.25);
        assert!(Rc::ptr_eq(&a, &b));
        assert_eq!(calls.get(), 1);

        tf.at(0.5);
        tf.at(0.25); // refreshes 0.25 in LRU order
        tf.at(0.75); // evicts 0.5
        assert_eq!(calls.get(), 3);
        tf.at(0.25);
        assert_eq!(calls.get(), 3);
        tf.at(0.5);
        assert_eq!(calls.get(), 4);
    }
}
