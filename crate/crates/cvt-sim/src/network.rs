//! Simulated broadcast medium: zero delay, reliable, fully logged.
//!
//! Robots exchange state only by broadcasting at their own trigger instants.
//! The channel delivers within the same simulation step, before any recipient
//! next evaluates its controller. The log is the ground truth for trigger
//! statistics: every broadcast is exactly one entry (robots do not message
//! themselves).

use crate::geometry::Point2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("message at t = {t} logged after t = {latest}")]
    TimeWentBackwards { t: f64, latest: f64 },
    #[error("channel with delay {delay} s / loss {loss} is not supported (hooks only)")]
    UnsupportedChannel { delay: f64, loss: f64 },
}

/// One broadcast: who sent what to whom, and when.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub t: f64,
    pub sender: usize,
    /// Sorted recipient indices (the union of both parties' neighbor
    /// estimates at send time).
    pub recipients: Vec<usize>,
    pub z: Point2,
    pub theta: f64,
    pub u: f64,
}

/// Transport characteristics. Only the ideal channel (zero delay, no loss)
/// is implemented; the fields exist so alternative transports have a place
/// to live, and anything else is rejected loudly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub delay: f64,
    pub loss: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            delay: 0.0,
            loss: 0.0,
        }
    }
}

impl ChannelModel {
    pub fn is_ideal(&self) -> bool {
        self.delay == 0.0 && self.loss == 0.0
    }
}

/// Append-only broadcast log with non-decreasing timestamps.
#[derive(Debug, Clone, Default)]
pub struct NetworkLog {
    channel: ChannelModel,
    messages: Vec<Message>,
}

impl NetworkLog {
    pub fn new(channel: ChannelModel) -> Self {
        NetworkLog {
            channel,
            messages: Vec::new(),
        }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Logs a broadcast and returns the recipients to deliver to right now
    /// (the whole set: the ideal channel neither delays nor drops).
    pub fn broadcast(&mut self, msg: Message) -> Result<&[usize], NetworkError> {
        if !self.channel.is_ideal() {
            return Err(NetworkError::UnsupportedChannel {
                delay: self.channel.delay,
                loss: self.channel.loss,
            });
        }
        if let Some(last) = self.messages.last() {
            if msg.t < last.t {
                return Err(NetworkError::TimeWentBackwards {
                    t: msg.t,
                    latest: last.t,
                });
            }
        }
        self.messages.push(msg);
        Ok(&self.messages.last().unwrap().recipients)
    }

    /// Aggregates trigger statistics for `n` robots from the log.
    pub fn stats(&self, n: usize) -> NetworkStats {
        let mut trigger_counts = vec![0u64; n];
        let mut last_time: Vec<Option<f64>> = vec![None; n];
        let mut intervals: Vec<Vec<f64>> = vec![Vec::new(); n];
        for msg in &self.messages {
            if msg.sender >= n {
                continue;
            }
            trigger_counts[msg.sender] += 1;
            if let Some(prev) = last_time[msg.sender] {
                intervals[msg.sender].push(msg.t - prev);
            }
            last_time[msg.sender] = Some(msg.t);
        }
        let min_inter_event = intervals
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, x| {
                Some(acc.map_or(x, |a| a.min(x)))
            });
        NetworkStats {
            trigger_counts,
            intervals,
            message_count: self.messages.len(),
            min_inter_event,
        }
    }
}

/// Run-level triggering evidence, recomputed from the message log.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    /// Broadcasts per robot.
    pub trigger_counts: Vec<u64>,
    /// Successive differences of each robot's own broadcast times.
    pub intervals: Vec<Vec<f64>>,
    pub message_count: usize,
    /// Smallest inter-broadcast interval of any single robot; `None` until
    /// some robot has broadcast twice.
    pub min_inter_event: Option<f64>,
}

impl NetworkStats {
    pub fn total_triggers(&self) -> u64 {
        self.trigger_counts.iter().sum()
    }
}

/// Writes the log as CSV: `t,sender,recipients,z_re,z_im,theta,u` with the
/// recipient indices pipe-joined.
pub fn write_messages_csv<W: std::io::Write>(
    log: &NetworkLog,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "t,sender,recipients,z_re,z_im,theta,u")?;
    for m in log.messages() {
        let recipients: Vec<String> = m.recipients.iter().map(|r| r.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            m.t,
            m.sender,
            recipients.join("|"),
            m.z.re,
            m.z.im,
            m.theta,
            m.u
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(t: f64, sender: usize, recipients: Vec<usize>) -> Message {
        Message {
            t,
            sender,
            recipients,
            z: Point2::new(1.0, 2.0),
            theta: 0.3,
            u: 0.5,
        }
    }

    #[test]
    fn broadcast_logs_and_returns_recipients() {
        let mut log = NetworkLog::default();
        let recipients = log.broadcast(msg(0.0, 0, vec![1, 2])).unwrap().to_vec();
        assert_eq!(recipients, vec![1, 2]);
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn empty_recipient_set_is_still_logged() {
        let mut log = NetworkLog::default();
        let recipients = log.broadcast(msg(0.0, 3, vec![])).unwrap().to_vec();
        assert!(recipients.is_empty());
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn time_reversal_is_rejected() {
        let mut log = NetworkLog::default();
        log.broadcast(msg(1.0, 0, vec![])).unwrap();
        assert!(matches!(
            log.broadcast(msg(0.5, 1, vec![])),
            Err(NetworkError::TimeWentBackwards { .. })
        ));
        // Equal timestamps are fine (simultaneous fires, index-ordered).
        assert!(log.broadcast(msg(1.0, 1, vec![])).is_ok());
    }

    #[test]
    fn non_ideal_channel_is_refused() {
        let mut log = NetworkLog::new(ChannelModel {
            delay: 0.1,
            loss: 0.0,
        });
        assert!(matches!(
            log.broadcast(msg(0.0, 0, vec![1])),
            Err(NetworkError::UnsupportedChannel { .. })
        ));
    }

    #[test]
    fn stats_of_empty_log() {
        let log = NetworkLog::default();
        let s = log.stats(3);
        assert_eq!(s.trigger_counts, vec![0, 0, 0]);
        assert_eq!(s.message_count, 0);
        assert_eq!(s.min_inter_event, None);
        assert_eq!(s.total_triggers(), 0);
    }

    #[test]
    fn intervals_are_successive_differences() {
        let mut log = NetworkLog::default();
        for &t in &[0.0, 0.22, 0.44] {
            log.broadcast(msg(t, 0, vec![1])).unwrap();
        }
        let s = log.stats(2);
        assert_eq!(s.trigger_counts, vec![3, 0]);
        assert_eq!(s.intervals[0].len(), 2);
        assert!((s.intervals[0][0] - 0.22).abs() < 1e-15);
        assert!((s.intervals[0][1] - 0.22).abs() < 1e-15);
        assert!((s.min_inter_event.unwrap() - 0.22).abs() < 1e-15);
    }

    #[test]
    fn per_robot_intervals_do_not_mix() {
        let mut log = NetworkLog::default();
        log.broadcast(msg(0.0, 0, vec![])).unwrap();
        log.broadcast(msg(0.1, 1, vec![])).unwrap();
        log.broadcast(msg(1.0, 0, vec![])).unwrap();
        let s = log.stats(2);
        // Robot 0 fired at 0 and 1: one interval of 1 s. The cross-robot
        // 0.1 s gap is not an inter-event interval of anyone.
        assert_eq!(s.intervals[0], vec![1.0]);
        assert!(s.intervals[1].is_empty());
        assert_eq!(s.min_inter_event, Some(1.0));
    }

    #[test]
    fn csv_export_round_trips_fields() {
        let mut log = NetworkLog::default();
        log.broadcast(msg(0.25, 2, vec![0, 3])).unwrap();
        let mut buf = Vec::new();
        write_messages_csv(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,sender,recipients,z_re,z_im,theta,u"));
        assert_eq!(lines.next(), Some("0.25,2,0|3,1,2,0.3,0.5"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn counts_equal_log_length() {
        let mut log = NetworkLog::default();
        for i in 0..10 {
            log.broadcast(msg(i as f64, i % 3, vec![(i + 1) % 3])).unwrap();
        }
        let s = log.stats(3);
        assert_eq!(s.total_triggers() as usize, log.len());
        assert_eq!(s.message_count, log.len());
    }
}
