use std::collections::HashSet;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Progress {
    pub graded: usize,
    pub remaining: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    SessionComplete,
    OutOfOrderSubmission { expected: Option<String> },
}

/// One grader's pass over an ordered list of images. Images already
/// holding a quality record are skipped.
#[derive(Debug, Clone)]
pub struct GradingSession {
    pub session_id: String,
    pub grader_id: String,
    image_ids: Vec<String>,
    graded: HashSet<String>,
    cursor: usize,
}

impl GradingSession {
    pub fn new(
        session_id: impl Into<String>,
        grader_id: impl Into<String>,
        image_ids: Vec<String>,
        already_graded: &HashSet<String>,
    ) -> Self {
        let graded = image_ids
            .iter()
            .filter(|id| already_graded.contains(*id))
            .cloned()
            .collect();
        let mut s = GradingSession {
            session_id: session_id.into(),
            grader_id: grader_id.into(),
            image_ids,
            graded,
            cursor: 0,
        };
        s.advance();
        s
    }

    fn advance(&mut self) {
        while self.cursor < self.image_ids.len() && self.graded.contains(&self.image_ids[self.cursor]) {
            self.cursor += 1;
        }
    }

    pub fn current(&self) -> Option<&str> {
        self.image_ids.get(self.cursor).map(String::as_str)
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.image_ids.iter().any(|id| id == image_id)
    }

    pub fn progress(&self) -> Progress {
        let total = self.image_ids.len();
        Progress {
            graded: self.graded.len(),
            remaining: total - self.graded.len(),
            total,
        }
    }

    pub fn next_image(&self) -> Result<&str, SessionError> {
        self.current().ok_or(SessionError::SessionComplete)
    }

    /// Checks that `image_id` is the cursor image without changing state.
    pub fn check_submission(&self, image_id: &str) -> Result<(), SessionError> {
        match self.current() {
            Some(cur) if cur == image_id => Ok(()),
            cur => Err(SessionError::OutOfOrderSubmission {
                expected: cur.map(str::to_string),
            }),
        }
    }

    /// Records an acknowledged grade for the cursor image and advances.
    pub fn mark_graded(&mut self, image_id: &str) -> Result<Progress, SessionError> {
        self.check_submission(image_id)?;
        self.graded.insert(image_id.to_string());
        self.advance();
        Ok(self.progress())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img{i}")).collect()
    }

    #[test]
    fn walks_images_in_order() {
        let mut s = GradingSession::new("s", "g", ids(3), &HashSet::new());
        assert_eq!(s.next_image(), Ok("img0"));
        assert_eq!(s.next_image(), Ok("img0"));
        assert_eq!(s.progress(), Progress { graded: 0, remaining: 3, total: 3 });
        assert!(matches!(s.mark_graded("img1"), Err(SessionError::OutOfOrderSubmission { .. })));
        assert_eq!(s.mark_graded("img0").unwrap().graded, 1);
        s.mark_graded("img1").unwrap();
        s.mark_graded("img2").unwrap();
        assert_eq!(s.next_image(), Err(SessionError::SessionComplete));
    }

    #[test]
    fn skips_previously_graded_images() {
        let done: HashSet<String> = ["img0", "img2"].iter().map(|s| s.to_string()).collect();
        let s = GradingSession::new("s", "g", ids(4), &done);
        assert_eq!(s.next_image(), Ok("img1"));
        assert_eq!(s.progress().graded, 2);
    }
}
