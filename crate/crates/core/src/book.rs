#[doc = include_str!("../../../book/src/introduction.md")]
pub struct Introduction;

#[doc = include_str!("../../../book/src/greens.md")]
pub struct Greens;

#[doc = include_str!("../../../book/src/points.md")]
pub struct Points;

#[doc = include_str!("../../../book/src/obstacle.md")]
pub struct Obstacle;

#[doc = include_str!("../../../book/src/farfield.md")]
pub struct Farfield;

#[doc = include_str!("../../../book/src/imaging.md")]
pub struct Imaging;

#[doc = include_str!("../../../book/src/cli.md")]
pub struct Cli;

#[doc = include_str!("../../../README.md")]
pub struct Readme;
