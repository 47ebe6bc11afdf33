pub mod libsvm;
pub mod split;
pub mod synthetic;
