//! Synthetic flow records for running the pipeline without the real dataset.
//!
//! Each row carries the category string it was drawn from (e.g.
//! `DDoS-SYN Flood`), using the five attack families and their eighteen
//! sub-categories of the IoMT benchmark. Feature distributions are invented:
//!
//! | feature | benign | shifted by |
//! |---|---|---|
//! | `conn_request_rate` | N(5, 1.5) | every attack family (DDoS 60±8, DoS 45±6, Recon 35±5, MQTT 40±5, Spoofing 32±4) |
//! | `inter_arrival_mean` | N(120, 30) | DDoS N(8, 3), DoS N(15, 5) |
//! | `packet_size_mean` | N(520, 150) | DDoS N(90, 30), DoS N(110, 35), MQTT malformed N(300, 100) |
//! | `flow_duration` | N(30, 10) | DDoS N(5, 2), DoS N(8, 3) |
//! | `distinct_dst_ports` | N(3, 1), rounded, ≥ 1 | Recon N(250, 60) |
//! | `port_entropy` | N(1.0, 0.3) | Recon N(5.5, 0.8) |
//! | `publish_rate` | N(2, 1) | MQTT N(40, 10) |
//! | `addr_consistency` | N(0.97, 0.02) in [0, 1] | Spoofing N(0.55, 0.1) |
//! | `inter_arrival_std` | N(40, 12) | DDoS N(4, 2), DoS N(6, 2) |
//! | `proto_tcp/udp/icmp` | one-hot, 70/25/5 % | fixed by sub-category (ARP spoofing: none) |
//!
//! Rates, sizes and durations are clamped at zero. Features beyond the twelve
//! above are `noise_k ~ N(0, 1)`; fewer than twelve keeps a prefix.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::preprocess::FlowDataset;
use crate::rng::Xoshiro256StarStar;

pub const DESIGNED_FEATURES: [&str; 12] = [
    "conn_request_rate",
    "inter_arrival_mean",
    "packet_size_mean",
    "flow_duration",
    "distinct_dst_ports",
    "port_entropy",
    "publish_rate",
    "addr_consistency",
    "inter_arrival_std",
    "proto_tcp",
    "proto_udp",
    "proto_icmp",
];

pub const BENIGN_CATEGORY: &str = "Benign";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackCategory {
    Ddos,
    Dos,
    Recon,
    Mqtt,
    Spoofing,
}

impl AttackCategory {
    pub const ALL: [AttackCategory; 5] = [Self::Ddos, Self::Dos, Self::Recon, Self::Mqtt, Self::Spoofing];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ddos => "DDoS",
            Self::Dos => "DoS",
            Self::Recon => "Recon",
            Self::Mqtt => "MQTT",
            Self::Spoofing => "Spoofing",
        }
    }

    pub fn sub_categories(self) -> &'static [&'static str] {
        match self {
            Self::Ddos | Self::Dos => &["SYN Flood", "TCP Flood", "ICMP Flood", "UDP Flood"],
            Self::Recon => &["Ping Sweep", "Vulnerability Scan", "OS Scan", "Port Scan"],
            Self::Spoofing => &["ARP Spoofing"],
            Self::Mqtt => &[
                "Malformed Data",
                "DoS Connect Flood",
                "DDoS Connect Flood",
                "DoS Publish Flood",
                "DDoS Publish Flood",
            ],
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for AttackCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "unknown attack category '{s}' (expected DDoS, DoS, Recon, MQTT or Spoofing)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_benign: usize,
    pub n_attack: usize,
    /// Weights in [`AttackCategory::ALL`] order.
    pub attack_mix: [f64; 5],
    pub seed: u64,
    pub n_features: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_benign: 2000,
            n_attack: 2000,
            attack_mix: [0.30, 0.25, 0.15, 0.20, 0.10],
            seed: 7,
            n_features: DESIGNED_FEATURES.len(),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_benign + self.n_attack == 0 {
            return Err(Error::Validation(
                "synthetic spec must request at least one row".into(),
            ));
        }
        if self.n_features == 0 {
            return Err(Error::Validation(
                "synthetic spec needs at least one feature".into(),
            ));
        }
        if self.attack_mix.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Validation(
                "attack mix weights must be non-negative".into(),
            ));
        }
        let sum: f64 = self.attack_mix.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "attack mix weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Parses `ddos=0.3,dos=0.25,...`; unnamed categories get weight 0.
    pub fn parse_mix(text: &str) -> Result<[f64; 5]> {
        let mut mix = [0.0; 5];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, weight) = part
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("mix entry '{part}' is not name=weight")))?;
            let cat: AttackCategory = name.parse()?;
            let w: f64 = weight
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("mix weight '{weight}' is not a number")))?;
            mix[cat.index()] = w;
        }
        Ok(mix)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFlows {
    pub dataset: FlowDataset,
    /// Category string per row: `Benign` or `<Family>-<Sub-category>`.
    pub categories: Vec<String>,
}

pub fn feature_names(n_features: usize) -> Vec<String> {
    (0..n_features)
        .map(|j| match DESIGNED_FEATURES.get(j) {
            Some(n) => n.to_string(),
            None => format!("noise_{}", j - DESIGNED_FEATURES.len()),
        })
        .collect()
}

fn pos(v: f64) -> f64 {
    v.max(0.0)
}

/// Draws one row of the twelve designed features.
fn draw_row(rng: &mut Xoshiro256StarStar, attack: Option<(AttackCategory, &str)>) -> [f64; 12] {
    let mut rate = pos(rng.normal(5.0, 1.5));
    let mut iat = pos(rng.normal(120.0, 30.0));
    let mut size = pos(rng.normal(520.0, 150.0));
    let mut duration = pos(rng.normal(30.0, 10.0));
    let mut ports = rng.normal(3.0, 1.0).round().max(1.0);
    let mut entropy = pos(rng.normal(1.0, 0.3));
    let mut publish = pos(rng.normal(2.0, 1.0));
    let mut consistency = rng.normal(0.97, 0.02).clamp(0.0, 1.0);
    let mut iat_std = pos(rng.normal(40.0, 12.0));
    let benign_proto = rng.weighted_index(&[0.70, 0.25, 0.05]);
    let mut proto = Some(benign_proto);

    if let Some((cat, sub)) = attack {
        match cat {
            AttackCategory::Ddos | AttackCategory::Dos => {
                let ddos = cat == AttackCategory::Ddos;
                rate = pos(if ddos {
                    rng.normal(60.0, 8.0)
                } else {
                    rng.normal(45.0, 6.0)
                });
                iat = pos(if ddos {
                    rng.normal(8.0, 3.0)
                } else {
                    rng.normal(15.0, 5.0)
                });
                size = pos(if ddos {
                    rng.normal(90.0, 30.0)
                } else {
                    rng.normal(110.0, 35.0)
                });
                duration = pos(if ddos {
                    rng.normal(5.0, 2.0)
                } else {
                    rng.normal(8.0, 3.0)
                });
                iat_std = pos(if ddos {
                    rng.normal(4.0, 2.0)
                } else {
                    rng.normal(6.0, 2.0)
                });
                proto = Some(match sub {
                    "UDP Flood" => 1,
                    "ICMP Flood" => 2,
                    _ => 0,
                });
            }
            AttackCategory::Recon => {
                rate = pos(rng.normal(35.0, 5.0));
                ports = rng.normal(250.0, 60.0).round().max(1.0);
                entropy = pos(rng.normal(5.5, 0.8));
                proto = Some(if sub == "Ping Sweep" { 2 } else { 0 });
            }
            AttackCategory::Mqtt => {
                rate = pos(rng.normal(40.0, 5.0));
                publish = pos(rng.normal(40.0, 10.0));
                if sub == "Malformed Data" {
                    size = pos(rng.normal(300.0, 100.0));
                }
                proto = Some(0);
            }
            AttackCategory::Spoofing => {
                rate = pos(rng.normal(32.0, 4.0));
                consistency = rng.normal(0.55, 0.1).clamp(0.0, 1.0);
                proto = None;
            }
        }
    }
    let one_hot = |k: usize| if proto == Some(k) { 1.0 } else { 0.0 };
    [
        rate,
        iat,
        size,
        duration,
        ports,
        entropy,
        publish,
        consistency,
        iat_std,
        one_hot(0),
        one_hot(1),
        one_hot(2),
    ]
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticFlows> {
    spec.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    let n = spec.n_benign + spec.n_attack;
    let mut classes: Vec<u8> = std::iter::repeat_n(0, spec.n_benign)
        .chain(std::iter::repeat_n(1, spec.n_attack))
        .collect();
    rng.shuffle(&mut classes);

    let mut data = Vec::with_capacity(n * spec.n_features);
    let mut categories = Vec::with_capacity(n);
    for &class in &classes {
        let attack = if class == 1 {
            let cat = AttackCategory::ALL[rng.weighted_index(&spec.attack_mix)];
            let subs = cat.sub_categories();
            let sub = subs[rng.below(subs.len() as u64) as usize];
            categories.push(format!("{}-{sub}", cat.name()));
            Some((cat, sub))
        } else {
            categories.push(BENIGN_CATEGORY.to_string());
            None
        };
        let row = draw_row(&mut rng, attack);
        for j in 0..spec.n_features {
            data.push(match row.get(j) {
                Some(&v) => v,
                None => rng.standard_normal(),
            });
        }
    }
    let features = Matrix::new(n, spec.n_features, data)?;
    let dataset = FlowDataset::new(
        features,
        classes,
        feature_names(spec.n_features),
        format!(
            "synthetic(benign={}, attack={}, seed={})",
            spec.n_benign, spec.n_attack, spec.seed
        ),
    )?;
    Ok(SyntheticFlows { dataset, categories })
}
