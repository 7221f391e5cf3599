use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Scenario constants shared by every stage of the pipeline.
///
/// `Default` gives the full-size scenario (36 APs, 6 UEs, 8 antennas per AP
/// on a 100 m square); [`SystemConfig::desk`] gives the reduced scenario used
/// for training runs on a workstation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub num_aps: usize,
    pub num_ues: usize,
    pub antennas_per_ap: usize,
    /// Pilot length; must equal `num_ues` (one orthogonal pilot per UE).
    pub pilot_length: usize,
    /// Antenna spacing over wavelength.
    pub antenna_spacing_ratio: f64,
    /// Side of the square service area in meters.
    pub area_side: f64,
    /// AP/UE height difference in meters.
    pub ap_ue_height_diff: f64,
    pub carrier_freq: f64,
    pub bandwidth: f64,
    /// Per-UE pilot transmit power in watts.
    pub ue_tx_power: f64,
    /// Receiver noise power in watts.
    pub noise_power: f64,
    /// Scattering paths per AP-UE link.
    pub num_paths: usize,
    /// Total width of the per-path AOA spread around the geometric angle, degrees.
    pub angular_spread_deg: f64,
    /// Log-normal shadowing standard deviation in dB; 0 disables shadowing.
    pub shadow_std_db: f64,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let bandwidth = 200e3;
        SystemConfig {
            num_aps: 36,
            num_ues: 6,
            antennas_per_ap: 8,
            pilot_length: 6,
            antenna_spacing_ratio: 0.5,
            area_side: 100.0,
            ap_ue_height_diff: 10.0,
            carrier_freq: 10e9,
            bandwidth,
            ue_tx_power: 0.1,
            noise_power: thermal_noise_power(bandwidth),
            num_paths: 6,
            angular_spread_deg: 10.0,
            shadow_std_db: 4.0,
            rng_seed: 0,
        }
    }
}

/// Thermal noise floor (-174 dBm/Hz) over `bandwidth` plus a 7 dB noise figure, in watts.
pub fn thermal_noise_power(bandwidth: f64) -> f64 {
    let dbm = -174.0 + 10.0 * bandwidth.log10() + 7.0;
    10f64.powf((dbm - 30.0) / 10.0)
}

impl SystemConfig {
    /// Reduced scenario for training on desk hardware.
    pub fn desk() -> Self {
        SystemConfig {
            num_aps: 16,
            num_ues: 4,
            antennas_per_ap: 4,
            pilot_length: 4,
            ..SystemConfig::default()
        }
    }

    /// Copy with a different UE count, keeping `pilot_length` tied to it.
    pub fn with_ues(mut self, num_ues: usize) -> Self {
        self.num_ues = num_ues;
        self.pilot_length = num_ues;
        self
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn antenna_spacing(&self) -> f64 {
        self.antenna_spacing_ratio * self.wavelength()
    }

    /// Largest horizontal distance between two points under wrap-around.
    pub fn max_wrap_distance(&self) -> f64 {
        self.area_side * std::f64::consts::SQRT_2 / 2.0
    }

    /// `p_k * tau_p`, the pilot energy per UE.
    pub fn pilot_energy(&self) -> f64 {
        self.ue_tx_power * self.pilot_length as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive_count = [
            ("num_aps", self.num_aps),
            ("num_ues", self.num_ues),
            ("antennas_per_ap", self.antennas_per_ap),
            ("num_paths", self.num_paths),
        ];
        for (field, value) in positive_count {
            if value == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.pilot_length != self.num_ues {
            return Err(Error::config(
                "pilot_length",
                format!(
                    "K = tau_p is required (num_ues = {}, pilot_length = {})",
                    self.num_ues, self.pilot_length
                ),
            ));
        }
        let positive_real = [
            ("antenna_spacing_ratio", self.antenna_spacing_ratio),
            ("area_side", self.area_side),
            ("ap_ue_height_diff", self.ap_ue_height_diff),
            ("carrier_freq", self.carrier_freq),
            ("bandwidth", self.bandwidth),
        ];
        for (field, value) in positive_real {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        let nonnegative = [
            ("ue_tx_power", self.ue_tx_power),
            ("noise_power", self.noise_power),
            ("angular_spread_deg", self.angular_spread_deg),
            ("shadow_std_db", self.shadow_std_db),
        ];
        for (field, value) in nonnegative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(field, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SystemConfig::default().validate().unwrap();
        SystemConfig::desk().validate().unwrap();
    }

    #[test]
    fn pilot_length_must_match_ues() {
        let cfg = SystemConfig {
            pilot_length: 5,
            ..SystemConfig::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("K = tau_p"), "{err}");
    }

    #[test]
    fn noise_floor_at_200khz() {
        // -174 + 53.01 + 7 = -113.99 dBm
        let dbm = 10.0 * (thermal_noise_power(200e3) * 1e3).log10();
        assert!((dbm + 113.9897).abs() < 1e-3, "{dbm}");
    }
}
