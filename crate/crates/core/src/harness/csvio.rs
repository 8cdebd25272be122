//! Strict CSV serialization for run outputs.
//!
//! Fixed column sets, '.' decimal separator, no locale dependence. Floats
//! print in Rust's shortest round-trip form, so writing is deterministic
//! and parsing recovers the exact values.

use crate::agent::{MetricsRow, QueryEvent, QueryKind};
use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "seed,step,episode,greedy_return,queries_onpolicy,queries_offpolicy,tau,disc_loss,wae_loss,sr_loss,policy_loss";
pub const QUERY_LOG_HEADER: &str = "step,kind,state_id,expert_action,tau_at_query";

pub fn write_metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.seed,
            r.step,
            r.episode,
            r.greedy_return,
            r.queries_onpolicy,
            r.queries_offpolicy,
            r.tau,
            r.disc_loss,
            r.wae_loss,
            r.sr_loss,
            r.policy_loss
        ));
    }
    out
}

fn field<'a>(parts: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<&'a str> {
    parts
        .next()
        .ok_or_else(|| Error::Parse(format!("metrics line {line}: missing column")))
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad metrics header: {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let mut p = raw.split(',');
        let row = MetricsRow {
            seed: num(field(&mut p, i)?, i)?,
            step: num(field(&mut p, i)?, i)?,
            episode: num(field(&mut p, i)?, i)?,
            greedy_return: num(field(&mut p, i)?, i)?,
            queries_onpolicy: num(field(&mut p, i)?, i)?,
            queries_offpolicy: num(field(&mut p, i)?, i)?,
            tau: num(field(&mut p, i)?, i)?,
            disc_loss: num(field(&mut p, i)?, i)?,
            wae_loss: num(field(&mut p, i)?, i)?,
            sr_loss: num(field(&mut p, i)?, i)?,
            policy_loss: num(field(&mut p, i)?, i)?,
        };
        if p.next().is_some() {
            return Err(Error::Parse(format!("line {i}: too many columns")));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_query_log_csv(log: &[QueryEvent]) -> String {
    let mut out = String::from(QUERY_LOG_HEADER);
    out.push('\n');
    for q in log {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            q.step,
            q.kind.name(),
            q.state_id,
            q.expert_action,
            q.tau_at_query
        ));
    }
    out
}

pub fn parse_query_log_csv(text: &str) -> Result<Vec<QueryEvent>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == QUERY_LOG_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad query log header: {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut log = Vec::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let mut p = raw.split(',');
        let step = num(field(&mut p, i)?, i)?;
        let kind = match field(&mut p, i)? {
            "onpolicy" => QueryKind::OnPolicy,
            "offpolicy" => QueryKind::OffPolicy,
            "baseline" => QueryKind::Baseline,
            other => return Err(Error::Parse(format!("line {i}: bad kind {other:?}"))),
        };
        let state_id = field(&mut p, i)?.to_string();
        let expert_action = num(field(&mut p, i)?, i)?;
        let tau_at_query = num(field(&mut p, i)?, i)?;
        log.push(QueryEvent {
            step,
            kind,
            state_id,
            expert_action,
            tau_at_query,
        });
    }
    Ok(log)
}
