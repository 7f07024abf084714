use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket shared across worker threads.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    per_second: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(per_second: f64, burst: u32) -> Self {
        assert!(per_second > 0.0, "rate must be positive");
        let capacity = f64::from(burst.max(1));
        RateLimiter { capacity, per_second, state: Mutex::new((capacity, Instant::now())) }
    }

    /// Blocks until a token is available and takes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut guard = self.state.lock().unwrap();
                let (tokens, last) = &mut *guard;
                let now = Instant::now();
                *tokens = (*tokens + now.duration_since(*last).as_secs_f64() * self.per_second).min(self.capacity);
                *last = now;
                if *tokens >= 1.0 {
                    *tokens -= 1.0;
                    return;
                }
                (1.0 - *tokens) / self.per_second
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_then_throttle() {
        let rl = RateLimiter::new(100.0, 3);
        let t = Instant::now();
        for _ in 0..3 {
            rl.acquire();
        }
        assert!(t.elapsed() < Duration::from_millis(5));
        for _ in 0..5 {
            rl.acquire();
        }
        assert!(t.elapsed() >= Duration::from_millis(40));
    }
}
