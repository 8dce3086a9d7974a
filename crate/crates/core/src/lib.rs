//! Single-object extended object tracking on 3D point clouds.

pub mod detector;
pub mod eot;
pub mod ground;
pub mod pointcloud;
pub mod sim;
pub mod pipeline;
