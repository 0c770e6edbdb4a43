//! Data parallelism over corpora and script batches.
//!
//! With the `parallel` feature this re-exports rayon. Without it, the same
//! names map onto plain iterators so call sites compile unchanged.

/// Stack size for workers that check deep proofs in unoptimized builds.
pub const WORKER_STACK: usize = 256 << 20;

#[cfg(feature = "parallel")]
pub mod prelude {
    pub use rayon::prelude::{IntoParallelIterator, IntoParallelRefIterator, ParallelIterator};
}

#[cfg(not(feature = "parallel"))]
pub mod prelude {
    pub use super::seq::{IntoParallelIterator, IntoParallelRefIterator};
}

/// Configures the global worker pool with [`WORKER_STACK`]-sized stacks.
/// Calling it again after the pool exists is harmless.
#[cfg(feature = "parallel")]
pub fn init_pool() {
    let _ = rayon::ThreadPoolBuilder::new().stack_size(WORKER_STACK).build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn init_pool() {}

/// Runs `f` on a thread with a [`WORKER_STACK`]-sized stack.
pub fn with_stack<R: Send + 'static>(f: impl FnOnce() -> R + Send + 'static) -> R {
    std::thread::Builder::new()
        .stack_size(WORKER_STACK)
        .spawn(f)
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}

/// Whether work is spread over a thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(not(feature = "parallel"))]
mod seq {
    pub trait IntoParallelIterator {
        type Item: Send;
        type Iter: Iterator<Item = Self::Item>;

        fn into_par_iter(self) -> Self::Iter;
    }

    impl<T> IntoParallelIterator for T
    where
        T: IntoIterator,
        T::Item: Send,
    {
        type Item = T::Item;
        type Iter = T::IntoIter;

        fn into_par_iter(self) -> Self::Iter {
            self.into_iter()
        }
    }

    pub trait IntoParallelRefIterator<'data> {
        type Iter: Iterator<Item = Self::Item>;
        type Item: Send + 'data;

        fn par_iter(&'data self) -> Self::Iter;
    }

    impl<'data, I: 'data + ?Sized> IntoParallelRefIterator<'data> for I
    where
        &'data I: IntoParallelIterator,
    {
        type Iter = <&'data I as IntoParallelIterator>::Iter;
        type Item = <&'data I as IntoParallelIterator>::Item;

        fn par_iter(&'data self) -> Self::Iter {
            self.into_par_iter()
        }
    }
}
