//! The guide's chapters, compiled as doctests so their snippets stay current.

#[doc = include_str!("../../../book/src/introduction.md")]
pub struct Introduction;

#[doc = include_str!("../../../book/src/operators.md")]
pub struct Operators;

#[doc = include_str!("../../../book/src/tridiagonalization.md")]
pub struct Tridiagonalization;

#[doc = include_str!("../../../book/src/tricg.md")]
pub struct TriCgChapter;

#[doc = include_str!("../../../book/src/trimr.md")]
pub struct TriMrChapter;

#[doc = include_str!("../../../book/src/baselines.md")]
pub struct Baselines;

#[doc = include_str!("../../../book/src/experiments.md")]
pub struct Experiments;

#[doc = include_str!("../../../book/src/verification.md")]
pub struct Verification;

#[doc = include_str!("../../../README.md")]
pub struct Readme;
