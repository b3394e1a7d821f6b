//! Random operation sequences against the review workflow, checked step by
//! step against a small reference model.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use saris_core::access::{is_permitted, Activity};
use saris_core::domain::{AnnualReview, ReviewDecision, ReviewStatus, ScholarshipStatus};
use saris_core::fixtures;
use saris_core::workflow::{PunishmentEdit, ReviewEdit, RewardEdit};
use saris_core::{Actor, Store, Workflow, WorkflowError};

pub const STUDENTS: [&str; 3] = ["100121", "100213", "201324"];

pub struct World {
    pub workflow: Workflow,
    pub actors: Vec<Actor>,
}

pub fn world() -> World {
    let store = Arc::new(fixtures::reference_store());
    let workflow = Workflow::new(store);
    let digest = saris_core::credentials::digest("pw", fixtures::FIXTURE_SALT);
    let sh1 = workflow.register_reviewer("Li Wei", "E-1001", &digest).unwrap();
    let sh2 = workflow.register_reviewer("Zhang Min", "E-2001", &digest).unwrap();
    let actors = vec![
        Actor::student("100121"),
        Actor::student("201324"),
        Actor::reviewer(sh1.reviewer_id.clone(), "SH1"),
        Actor::reviewer(sh2.reviewer_id, "SH2"),
        // Claims the wrong school for a real reviewer id.
        Actor::reviewer(sh1.reviewer_id, "SH2"),
        Actor::csc("csc-1"),
        // Not a stored student.
        Actor::student("999999"),
    ];
    World { workflow, actors }
}

#[derive(Debug, Clone)]
pub enum Op {
    Submit { year: i32 },
    Verify { review: usize, approve: bool },
    EditReview { review: usize },
    Score { student: usize, subject: usize, marks: f64 },
    Punish { student: usize, level: &'static str },
    EditPunishment { item: usize },
    Reward { student: usize },
    EditReward { item: usize },
    Status { student: usize },
    View { student: usize },
}

impl Op {
    fn activity(&self) -> Activity {
        match self {
            Op::Submit { .. } => Activity::SubmitAnnualReview,
            Op::Verify { .. } => Activity::VerifyReview,
            Op::EditReview { .. } => Activity::EditSubmittedReview,
            Op::Score { .. } => Activity::SubmitEditScores,
            Op::Punish { .. } | Op::EditPunishment { .. } => Activity::SubmitEditPunishments,
            Op::Reward { .. } | Op::EditReward { .. } => Activity::SubmitEditRewards,
            Op::Status { .. } => Activity::EditScholarshipStatus,
            Op::View { .. } => Activity::ViewScores,
        }
    }

    fn mutates(&self) -> bool {
        !matches!(self, Op::View { .. })
    }
}

pub fn random_op(rng: &mut ChaCha8Rng) -> Op {
    let levels = [
        "Warning",
        "Serious Warning1",
        "SeriousWarning2",
        "Dismissal",
        "Expulsion",
    ];
    match rng.gen_range(0..10) {
        0 => Op::Submit {
            year: rng.gen_range(2014..=2016),
        },
        1 => Op::Verify {
            review: rng.gen_range(0..8),
            approve: rng.gen_bool(0.5),
        },
        2 => Op::EditReview {
            review: rng.gen_range(0..8),
        },
        3 => Op::Score {
            student: rng.gen_range(0..STUDENTS.len()),
            subject: rng.gen_range(1..=7),
            marks: f64::from(rng.gen_range(0..=120)),
        },
        4 => Op::Punish {
            student: rng.gen_range(0..STUDENTS.len()),
            level: levels.choose(rng).copied().unwrap(),
        },
        5 => Op::EditPunishment {
            item: rng.gen_range(0..6),
        },
        6 => Op::Reward {
            student: rng.gen_range(0..STUDENTS.len()),
        },
        7 => Op::EditReward {
            item: rng.gen_range(0..6),
        },
        8 => Op::Status {
            student: rng.gen_range(0..STUDENTS.len()),
        },
        _ => Op::View {
            student: rng.gen_range(0..STUDENTS.len()),
        },
    }
}

/// Slot `len` stands for an id that does not exist.
fn nth(items: &[String], i: usize) -> Option<String> {
    items.get(i % (items.len() + 1)).cloned()
}

fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 6, 1).unwrap()
}

fn apply(w: &Workflow, actor: &Actor, op: &Op) -> Result<(), WorkflowError> {
    let tables = w.store().snapshot();
    let reviews: Vec<String> = tables.all::<AnnualReview>().map(|r| r.review_id.clone()).collect();
    let punishments: Vec<String> = tables
        .all::<saris_core::domain::Punishment>()
        .map(|p| p.punishment_id.clone())
        .collect();
    let rewards: Vec<String> = tables
        .all::<saris_core::domain::Reward>()
        .map(|r| r.reward_id.clone())
        .collect();
    let missing = || "ZZ-missing".to_string();
    match op {
        Op::Submit { year } => w.submit_annual_review(actor, *year, "Year summary").map(drop),
        Op::Verify { review, approve } => {
            let decision = if *approve {
                ReviewDecision::Approve
            } else {
                ReviewDecision::Disapprove
            };
            let id = nth(&reviews, *review).unwrap_or_else(missing);
            w.verify_annual_review(actor, &id, "Checked", decision).map(drop)
        }
        Op::EditReview { review } => {
            let id = nth(&reviews, *review).unwrap_or_else(missing);
            let edit = ReviewEdit {
                student_summary: Some("Revised summary".into()),
                ..ReviewEdit::default()
            };
            w.edit_annual_review(actor, &id, &edit).map(drop)
        }
        Op::Score {
            student,
            subject,
            marks,
        } => w
            .record_score(actor, STUDENTS[*student], &format!("SB{subject}"), *marks, 30.0)
            .map(drop),
        Op::Punish { student, level } => w
            .record_punishment(actor, STUDENTS[*student], level, "Incident", date())
            .map(drop),
        Op::EditPunishment { item } => {
            let id = nth(&punishments, *item).unwrap_or_else(missing);
            let edit = PunishmentEdit {
                description: Some("Amended".into()),
                ..PunishmentEdit::default()
            };
            w.edit_punishment(actor, &id, &edit).map(drop)
        }
        Op::Reward { student } => w.record_reward(actor, STUDENTS[*student], "Award", date()).map(drop),
        Op::EditReward { item } => {
            let id = nth(&rewards, *item).unwrap_or_else(missing);
            let edit = RewardEdit {
                description: Some("Amended".into()),
                ..RewardEdit::default()
            };
            w.edit_reward(actor, &id, &edit).map(drop)
        }
        Op::Status { student } => w
            .set_scholarship_status(actor, STUDENTS[*student], ScholarshipStatus::Continued)
            .map(drop),
        Op::View { student } => w.view_scores(actor, STUDENTS[*student]).map(drop),
    }
}

fn statuses(store: &Store) -> BTreeMap<String, (String, i32, ReviewStatus)> {
    store
        .snapshot()
        .all::<AnnualReview>()
        .map(|r| (r.review_id.clone(), (r.student_id.clone(), r.academic_year, r.status)))
        .collect()
}

/// Runs `steps` random operations and checks the workflow invariants after
/// each one. Returns the number of operations that succeeded.
pub fn check_sequence(rng: &mut ChaCha8Rng, steps: usize) -> Result<usize, String> {
    let World { workflow, actors } = world();
    let store = workflow.store().clone();
    let mut ok = 0;
    for step in 0..steps {
        let actor = actors.choose(rng).unwrap().clone();
        let op = random_op(rng);
        let before_hash = store.state_hash();
        let before_audit = store.snapshot().audit.len();
        let before = statuses(&store);
        let submitted: BTreeSet<(String, i32)> = before.values().map(|(s, y, _)| (s.clone(), *y)).collect();

        let result = apply(&workflow, &actor, &op);
        let after = statuses(&store);
        let after_audit = store.snapshot().audit.len();
        let ctx = || format!("step {step}: {:?} as {:?} -> {:?}", op, actor, result);

        match &result {
            Ok(()) => {
                ok += 1;
                if !is_permitted(actor.role, op.activity()) {
                    return Err(format!("grid-denied call succeeded; {}", ctx()));
                }
                let expected = before_audit + usize::from(op.mutates());
                if after_audit != expected {
                    return Err(format!("audit grew {before_audit}->{after_audit}; {}", ctx()));
                }
            }
            Err(e) => {
                if store.state_hash() != before_hash || after_audit != before_audit {
                    return Err(format!("rejected call changed state; {}", ctx()));
                }
                if !is_permitted(actor.role, op.activity()) && !matches!(e, WorkflowError::PermissionDenied { .. }) {
                    return Err(format!("grid denial reported as {e:?}; {}", ctx()));
                }
            }
        }

        if let (Op::Submit { year }, Some(student)) = (&op, actor.student_id.as_ref()) {
            let duplicate = submitted.contains(&(student.clone(), *year));
            let rejected_as_duplicate = matches!(result, Err(WorkflowError::DuplicateReview { .. }));
            let actor_exists = store.snapshot().get::<saris_core::domain::Student>(student).is_some();
            if actor_exists && duplicate != rejected_as_duplicate {
                return Err(format!("duplicate detection mismatch; {}", ctx()));
            }
        }

        for (id, (_, _, old)) in &before {
            let new = after.get(id).map(|v| v.2);
            let legal = match (old, new) {
                (_, None) => false,
                (a, Some(b)) if *a == b => true,
                (ReviewStatus::Submitted, Some(ReviewStatus::Verified)) => true,
                _ => false,
            };
            if !legal {
                return Err(format!("review {id} went {old:?} -> {new:?}; {}", ctx()));
            }
        }
        for (id, (_, _, status)) in &after {
            if !before.contains_key(id) && *status != ReviewStatus::Submitted {
                return Err(format!("review {id} created as {status:?}; {}", ctx()));
            }
        }
        let per_year: BTreeSet<(String, i32)> = after.values().map(|(s, y, _)| (s.clone(), *y)).collect();
        if per_year.len() != after.len() {
            return Err(format!("two reviews share a (student, year); {}", ctx()));
        }
        if let Some(d) = store.snapshot().dangling_references().first() {
            return Err(format!("dangling reference {d:?}; {}", ctx()));
        }
    }
    Ok(ok)
}
