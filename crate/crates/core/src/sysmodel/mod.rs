//! Scenario geometry, multipath channel synthesis, pilot reception and LS
//! channel estimation.

mod channel;
mod config;
mod layout;

pub use channel::{
    channel_from_paths, complex_normal, despread_and_ls, draw_channel, pilot_matrix, pilot_receive, steering_vector,
    ChannelSet,
};
pub use config::{thermal_noise_power, SystemConfig};
pub use layout::{
    generate_layout, large_scale_fading, wrap_angle, wrap_coord, wrap_delta, wrap_distance, Layout, LinkGeometry, Point,
};
