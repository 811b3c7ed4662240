//! Trajectory CSV, one row per recorded sample, SI units.

use std::io::{Read, Write};

use quadfloat_core::sim::Trajectory;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const HEADER: &str =
    "t,x,y,z,phi,theta,psi,vx,vy,vz,p_phi,p_theta,p_psi,T_tot,tau_phi,tau_theta,tau_psi,capsize_flag";

/// `p_*` are the Euler-angle rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Row {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub p_phi: f64,
    pub p_theta: f64,
    pub p_psi: f64,
    pub T_tot: f64,
    pub tau_phi: f64,
    pub tau_theta: f64,
    pub tau_psi: f64,
    pub capsize_flag: u8,
}

pub fn rows(traj: &Trajectory) -> Vec<Row> {
    traj.samples
        .iter()
        .map(|s| {
            let (st, w) = (&s.state, &s.wrench);
            Row {
                t: st.t,
                x: st.p.x,
                y: st.p.y,
                z: st.p.z,
                phi: st.eta.x,
                theta: st.eta.y,
                psi: st.eta.z,
                vx: st.v.x,
                vy: st.v.y,
                vz: st.v.z,
                p_phi: st.eta_dot.x,
                p_theta: st.eta_dot.y,
                p_psi: st.eta_dot.z,
                T_tot: w.thrust,
                tau_phi: w.torque.x,
                tau_theta: w.torque.y,
                tau_psi: w.torque.z,
                capsize_flag: s.capsize as u8,
            }
        })
        .collect()
}

pub fn write<W: Write>(out: W, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows(traj) {
        w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    // an empty trajectory still gets its header
    if traj.is_empty() {
        w.write_record(HEADER.split(',')).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub fn read<R: Read>(input: R) -> Result<Vec<Row>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| CliError::InvalidInput(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(CliError::InvalidInput(format!("unexpected trajectory header, want `{HEADER}`")));
    }
    r.deserialize()
        .collect::<Result<Vec<Row>, _>>()
        .map_err(|e| CliError::InvalidInput(e.to_string()))
}
