//! Slot-by-slot simulation of the hopping network.
//!
//! Every user's sub-band draw in slot `t` comes from stream `t` of a ChaCha
//! key derived from `(seed, user)`, so results do not depend on how slots are
//! split across threads. Slots are processed in fixed-size chunks whose partial sums are
//! reduced in chunk order.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gains::sample_hop;
use crate::model::{HoppingProfile, NetworkScenario, LEVEL_MERGE_RTOL};
use crate::rng::KeyedStreams;

const SLOT_CHUNK: u64 = 1024;
const SAMPLE_CHUNK: usize = 1024;
const STREAM_SLOTS: u64 = 0x736c_6f74;
const STREAM_SAMPLES: u64 = 0x7361_6d70;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scenario: NetworkScenario,
    pub profiles: Vec<HoppingProfile>,
    pub n_slots: u64,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.check_profiles(&self.profiles)?;
        if self.n_slots == 0 {
            return Err(Error::InvalidArgument("need at least one slot".into()));
        }
        if self.scenario.n_subbands() > 64 {
            return Err(Error::TooLarge { what: "sub-bands in simulation", size: self.scenario.n_subbands() as f64, limit: 64.0 });
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Empirical frequency of one interference level `sigma2 = noise + c P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelFrequency {
    pub c: f64,
    pub sigma2: f64,
    pub freq: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserStats {
    pub user: usize,
    /// Interference-free sub-bands among the user's own, per slot.
    pub free_subbands: Estimate,
    /// Slots in which the user occupied at least one sub-band; level
    /// frequencies are averaged over these.
    pub active_slots: u64,
    pub levels: Vec<LevelFrequency>,
    /// Probability that the user occupies each sub-band.
    pub occupancy: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub n_slots: u64,
    pub master_seed: u64,
    pub users: Vec<UserStats>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: f64,
    s: f64,
    ss: f64,
}

impl Sums {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.s += x;
        self.ss += x * x;
    }

    fn add(&mut self, o: &Sums) {
        self.n += o.n;
        self.s += o.s;
        self.ss += o.ss;
    }

    fn estimate(&self) -> Estimate {
        if self.n == 0.0 {
            return Estimate { mean: f64::NAN, std_error: f64::NAN };
        }
        let mean = self.s / self.n;
        let var = if self.n > 1.0 { ((self.ss - self.s * mean) / (self.n - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, std_error: (var / self.n).sqrt() }
    }
}

#[derive(Debug, Clone, Default)]
struct UserTally {
    free: Sums,
    active: u64,
    // per-level sum and sum of squares of the per-slot fraction; zeros for
    // slots where the level is absent are implied by `active`
    levels: BTreeMap<u64, (f64, f64)>,
    occupancy: Vec<Sums>,
}

impl UserTally {
    fn add(&mut self, o: &UserTally) {
        self.free.add(&o.free);
        self.active += o.active;
        for (k, (s, ss)) in &o.levels {
            let e = self.levels.entry(*k).or_insert((0.0, 0.0));
            e.0 += s;
            e.1 += ss;
        }
        if self.occupancy.is_empty() {
            self.occupancy = o.occupancy.clone();
        } else {
            self.occupancy.iter_mut().zip(&o.occupancy).for_each(|(a, b)| a.add(b));
        }
    }
}

fn user_streams(cfg: &SimConfig) -> Vec<KeyedStreams> {
    (0..cfg.profiles.len()).map(|k| KeyedStreams::new(cfg.master_seed, &[STREAM_SLOTS, k as u64])).collect()
}

fn draw_masks(cfg: &SimConfig, streams: &[KeyedStreams], slot: u64) -> Vec<(u64, usize)> {
    let u = cfg.scenario.n_subbands();
    cfg.profiles
        .iter()
        .zip(streams)
        .map(|(p, streams)| {
            let mut rng = streams.stream(slot);
            let set = sample_hop(p, u, &mut rng);
            (set.iter().fold(0u64, |m, j| m | 1 << j), set.len())
        })
        .collect()
}

fn simulate_chunk(cfg: &SimConfig, streams: &[KeyedStreams], slots: std::ops::Range<u64>) -> Vec<UserTally> {
    let s = &cfg.scenario;
    let n = s.n_users();
    let u = s.n_subbands();
    let mut tallies: Vec<UserTally> =
        (0..n).map(|_| UserTally { occupancy: vec![Sums::default(); u], ..Default::default() }).collect();
    for slot in slots {
        let masks = draw_masks(cfg, streams, slot);
        for (i, tally) in tallies.iter_mut().enumerate() {
            let (mine, v) = masks[i];
            for (j, occ) in tally.occupancy.iter_mut().enumerate() {
                occ.push((mine >> j & 1) as f64);
            }
            let mut free = 0.0;
            let mut counts: Vec<(u64, f64)> = Vec::new();
            for j in (0..u).filter(|j| mine >> j & 1 == 1) {
                let c = (0..n)
                    .filter(|k| *k != i && masks[*k].0 >> j & 1 == 1)
                    .map(|k| s.gain_sq(k, i) / masks[k].1 as f64)
                    .sum::<f64>()
                    + 0.0; // an empty sum is -0.0; keys must order numerically
                if c == 0.0 {
                    free += 1.0;
                }
                match counts.iter_mut().find(|(key, _)| *key == c.to_bits()) {
                    Some(entry) => entry.1 += 1.0,
                    None => counts.push((c.to_bits(), 1.0)),
                }
            }
            tally.free.push(free);
            if v > 0 {
                tally.active += 1;
                for (key, count) in counts {
                    let frac = count / v as f64;
                    let e = tally.levels.entry(key).or_insert((0.0, 0.0));
                    e.0 += frac;
                    e.1 += frac * frac;
                }
            }
        }
    }
    tallies
}

/// Simulates `n_slots` slots and tallies, per user, free sub-bands, realized
/// interference levels on its own sub-bands, and sub-band occupancy.
pub fn run(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let n_chunks = cfg.n_slots.div_ceil(SLOT_CHUNK);
    let streams = user_streams(cfg);
    let partial: Vec<Vec<UserTally>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| simulate_chunk(cfg, &streams, c * SLOT_CHUNK..((c + 1) * SLOT_CHUNK).min(cfg.n_slots)))
        .collect();
    let mut total = partial[0].clone();
    for chunk in &partial[1..] {
        total.iter_mut().zip(chunk).for_each(|(a, b)| a.add(b));
    }
    let noise = cfg.scenario.noise_power();
    let power = cfg.scenario.total_power();
    let users = total
        .into_iter()
        .enumerate()
        .map(|(user, t)| {
            let mut merged: Vec<(f64, f64, f64)> = Vec::new();
            for (key, (s, ss)) in t.levels {
                let c = f64::from_bits(key);
                match merged.last_mut() {
                    Some(last) if (noise + c * power - (noise + last.0 * power)).abs() <= LEVEL_MERGE_RTOL * (noise + c * power) => {
                        last.1 += s;
                        last.2 += ss;
                    }
                    _ => merged.push((c, s, ss)),
                }
            }
            let active = t.active as f64;
            let levels = merged
                .into_iter()
                .map(|(c, s, ss)| LevelFrequency {
                    c,
                    sigma2: noise + c * power,
                    freq: Sums { n: active, s, ss }.estimate(),
                })
                .collect();
            UserStats {
                user,
                free_subbands: t.free.estimate(),
                active_slots: t.active,
                levels,
                occupancy: t.occupancy.iter().map(Sums::estimate).collect(),
            }
        })
        .collect();
    Ok(SimStats { n_slots: cfg.n_slots, master_seed: cfg.master_seed, users })
}

/// Paired draws of the received vector `Y` and noise-plus-interference `Z`
/// over all `u` sub-bands, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSamples {
    pub n_subbands: usize,
    pub n_samples: usize,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl ReceivedSamples {
    pub fn y_row(&self, r: usize) -> &[f64] {
        &self.y[r * self.n_subbands..(r + 1) * self.n_subbands]
    }

    pub fn z_row(&self, r: usize) -> &[f64] {
        &self.z[r * self.n_subbands..(r + 1) * self.n_subbands]
    }

    /// `[u64 u][u64 n][Y: n*u f64][Z: n*u f64]`, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n_subbands as u64).to_le_bytes())?;
        w.write_all(&(self.n_samples as u64).to_le_bytes())?;
        for x in self.y.iter().chain(&self.z) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let u = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        let len = u
            .checked_mul(n)
            .filter(|l| *l <= 1 << 32)
            .ok_or_else(|| Error::InvalidArgument(format!("dump header {u} x {n} is implausible")))?;
        let mut read = || -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut word)?;
                out.push(f64::from_le_bytes(word));
            }
            Ok(out)
        };
        let y = read()?;
        let z = read()?;
        Ok(Self { n_subbands: u, n_samples: n, y, z })
    }
}

/// Draws received samples for `user` transmitting on its first `v` sub-bands
/// (`v` drawn from its profile), with every other user hopping at random and
/// all signals Gaussian of per-sub-band variance `P / v_k`.
pub fn sample_received(cfg: &SimConfig, user: usize, n_samples: usize, seed: u64) -> Result<ReceivedSamples> {
    cfg.scenario.check_profiles(&cfg.profiles)?;
    cfg.scenario.check_user(user)?;
    let s = &cfg.scenario;
    let u = s.n_subbands();
    let n_chunks = n_samples.div_ceil(SAMPLE_CHUNK);
    let streams = KeyedStreams::new(seed, &[STREAM_SAMPLES, user as u64]);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let rows = c * SAMPLE_CHUNK..((c + 1) * SAMPLE_CHUNK).min(n_samples);
            let mut y = Vec::with_capacity(rows.len() * u);
            let mut z = Vec::with_capacity(rows.len() * u);
            for r in rows {
                let mut rng = streams.stream(r as u64);
                let noise_sd = s.noise_power().sqrt();
                let mut zr: Vec<f64> = (0..u).map(|_| noise_sd * rng.sample::<f64, _>(StandardNormal)).collect();
                for (k, p) in cfg.profiles.iter().enumerate() {
                    if k == user {
                        continue;
                    }
                    let set = sample_hop(p, u, &mut rng);
                    if set.is_empty() {
                        continue;
                    }
                    let sd = s.gain(k, user).abs() * (s.total_power() / set.len() as f64).sqrt();
                    for j in set {
                        zr[j] += sd * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                let v = sample_hop(&cfg.profiles[user], u, &mut rng).len();
                let mut yr = zr.clone();
                if v > 0 {
                    let sd = s.gain(user, user).abs() * (s.total_power() / v as f64).sqrt();
                    for y in yr.iter_mut().take(v) {
                        *y += sd * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                y.extend(yr);
                z.extend(zr);
            }
            (y, z)
        })
        .collect();
    let mut y = Vec::with_capacity(n_samples * u);
    let mut z = Vec::with_capacity(n_samples * u);
    for (py, pz) in parts {
        y.extend(py);
        z.extend(pz);
    }
    Ok(ReceivedSamples { n_subbands: u, n_samples, y, z })
}
