//! Result persistence: JSON-lines for records, CSV with fixed column order
//! for tables.

use std::io::Write;

use super::campaign::CampaignRow;
use crate::error::Result;

pub fn write_jsonl(rows: &[CampaignRow], mut out: impl Write) -> Result<()> {
    for row in rows {
        let line = serde_json::to_string(row)
            .map_err(|e| crate::error::Error::Validation(format!("serialize: {e}")))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub const CSV_HEADER: &str = "n,t,j,omega_true,omega_prime,m_trials,campaigns,backend,protocol,p_expectation,p_prime,delta_omega,bias,hl_reference,sql_reference,qfi,max_oracle_calls_seen,oracle_call_bound,wall_time_s,seed,config_hash,version";

pub fn write_csv(rows: &[CampaignRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.t,
            r.j,
            r.omega_true,
            r.omega_prime,
            r.m_trials,
            r.campaigns,
            r.backend,
            r.protocol,
            r.p_expectation,
            r.p_prime,
            r.delta_omega,
            r.bias,
            r.hl_reference,
            r.sql_reference,
            r.qfi,
            r.max_oracle_calls_seen,
            r.oracle_call_bound,
            r.wall_time_s,
            r.seed,
            r.config_hash,
            r.version
        )?;
    }
    Ok(())
}
