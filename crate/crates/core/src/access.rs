//! Role x activity permission matrix.
//!
//! Every mutating workflow operation consults [`is_permitted`] before it
//! touches the store. The grid is role-level only; per-record ownership
//! (a student sees only their own records, a reviewer acts only within their
//! school) is enforced in [`crate::workflow`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Student,
    Reviewer,
    #[serde(rename = "CSC")]
    Csc,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Student, Role::Reviewer, Role::Csc];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Student => "Student",
            Role::Reviewer => "Reviewer",
            Role::Csc => "CSC",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Student" | "student" => Ok(Role::Student),
            "Reviewer" | "reviewer" => Ok(Role::Reviewer),
            "CSC" | "Csc" | "csc" => Ok(Role::Csc),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Activity {
    Register,
    Login,
    SubmitAnnualReview,
    ViewSubmittedReview,
    EditSubmittedReview,
    VerifyReview,
    SubmitEditScores,
    ViewScores,
    SubmitEditPunishments,
    ViewPunishments,
    SubmitEditRewards,
    ViewRewards,
    ViewScholarshipStatus,
    EditScholarshipStatus,
}

impl Activity {
    pub const ALL: [Activity; 14] = [
        Activity::Register,
        Activity::Login,
        Activity::SubmitAnnualReview,
        Activity::ViewSubmittedReview,
        Activity::EditSubmittedReview,
        Activity::VerifyReview,
        Activity::SubmitEditScores,
        Activity::ViewScores,
        Activity::SubmitEditPunishments,
        Activity::ViewPunishments,
        Activity::SubmitEditRewards,
        Activity::ViewRewards,
        Activity::ViewScholarshipStatus,
        Activity::EditScholarshipStatus,
    ];

    /// Row caption as shown on the access-rights sheet.
    pub fn caption(self) -> &'static str {
        match self {
            Activity::Register => "Register",
            Activity::Login => "Login",
            Activity::SubmitAnnualReview => "Submit Annual Review",
            Activity::ViewSubmittedReview => "View Submitted A. Review",
            Activity::EditSubmittedReview => "Edit Submitted A. Review",
            Activity::VerifyReview => "Verify/Authenticate A. Review",
            Activity::SubmitEditScores => "Submit/Edit Academic Scores",
            Activity::ViewScores => "View Academic Scores",
            Activity::SubmitEditPunishments => "Submit/Edit Punishments",
            Activity::ViewPunishments => "View Punishments",
            Activity::SubmitEditRewards => "Submit/Edit Rewards",
            Activity::ViewRewards => "View Rewards",
            Activity::ViewScholarshipStatus => "View Scholarship Status",
            Activity::EditScholarshipStatus => "Edit Scholarship Status",
        }
    }

    pub fn is_view(self) -> bool {
        matches!(
            self,
            Activity::ViewSubmittedReview
                | Activity::ViewScores
                | Activity::ViewPunishments
                | Activity::ViewRewards
                | Activity::ViewScholarshipStatus
        )
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.caption())
    }
}

impl FromStr for Activity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Activity::ALL
            .iter()
            .copied()
            .find(|a| format!("{a:?}") == s || a.caption() == s)
            .ok_or_else(|| format!("unknown activity `{s}`"))
    }
}

const S: bool = true;
const R: bool = true;
const C: bool = true;
const NO: bool = false;

/// Columns: Student, Reviewer, CSC. Rows follow [`Activity::ALL`].
const GRANTS: [[bool; 3]; 14] = [
    [NO, R, NO], // Register
    [S, R, C],   // Login
    [S, NO, NO], // Submit Annual Review
    [S, R, C],   // View Submitted A. Review
    [NO, R, C],  // Edit Submitted A. Review
    [NO, R, NO], // Verify/Authenticate A. Review
    [NO, R, NO], // Submit/Edit Academic Scores
    [S, R, C],   // View Academic Scores
    [NO, R, NO], // Submit/Edit Punishments
    [S, R, C],   // View Punishments
    [NO, R, NO], // Submit/Edit Rewards
    [S, R, C],   // View Rewards
    [S, R, C],   // View Scholarship Status
    [NO, NO, C], // Edit Scholarship Status
];

/// The full grid as a value, for rendering and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermissionMatrix;

impl PermissionMatrix {
    pub fn get(&self, role: Role, activity: Activity) -> bool {
        is_permitted(role, activity)
    }

    /// `(role, activity, permitted)` for all 42 cells, activity-major.
    pub fn cells(&self) -> impl Iterator<Item = (Role, Activity, bool)> {
        Activity::ALL
            .into_iter()
            .flat_map(|a| Role::ALL.into_iter().map(move |r| (r, a, is_permitted(r, a))))
    }
}

pub fn is_permitted(role: Role, activity: Activity) -> bool {
    GRANTS[activity as usize][role as usize]
}

pub fn permitted_activities(role: Role) -> BTreeSet<Activity> {
    Activity::ALL.into_iter().filter(|&a| is_permitted(role, a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_cells() {
        assert!(is_permitted(Role::Reviewer, Activity::Register));
        assert!(!is_permitted(Role::Student, Activity::EditScholarshipStatus));
        assert!(is_permitted(Role::Student, Activity::SubmitAnnualReview));
        assert!(!is_permitted(Role::Csc, Activity::VerifyReview));
    }

    #[test]
    fn per_role_cardinality() {
        use Activity::*;
        let student: BTreeSet<_> = [
            Login,
            SubmitAnnualReview,
            ViewSubmittedReview,
            ViewScores,
            ViewPunishments,
            ViewRewards,
            ViewScholarshipStatus,
        ]
        .into();
        assert_eq!(permitted_activities(Role::Student), student);

        let reviewer = permitted_activities(Role::Reviewer);
        assert_eq!(reviewer.len(), 12);
        assert!(!reviewer.contains(&SubmitAnnualReview));
        assert!(!reviewer.contains(&EditScholarshipStatus));

        let csc: BTreeSet<_> = [
            Login,
            ViewSubmittedReview,
            EditSubmittedReview,
            ViewScores,
            ViewPunishments,
            ViewRewards,
            ViewScholarshipStatus,
            EditScholarshipStatus,
        ]
        .into();
        assert_eq!(permitted_activities(Role::Csc), csc);
    }

    #[test]
    fn views_open_to_everyone() {
        let views: Vec<_> = Activity::ALL.into_iter().filter(|a| a.is_view()).collect();
        assert_eq!(views.len(), 5);
        for a in views {
            for r in Role::ALL {
                assert!(is_permitted(r, a), "{r} {a}");
            }
        }
    }

    #[test]
    fn set_agrees_with_cells() {
        for r in Role::ALL {
            let set = permitted_activities(r);
            for a in Activity::ALL {
                assert_eq!(set.contains(&a), is_permitted(r, a));
            }
        }
        assert_eq!(PermissionMatrix.cells().count(), 42);
    }

    #[test]
    fn parse_round_trip() {
        for a in Activity::ALL {
            assert_eq!(format!("{a:?}").parse::<Activity>().unwrap(), a);
            assert_eq!(a.caption().parse::<Activity>().unwrap(), a);
        }
        for r in Role::ALL {
            assert_eq!(r.as_str().parse::<Role>().unwrap(), r);
        }
    }
}
