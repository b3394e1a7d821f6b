//! Reusable seed data: a small reference catalogue, the five published
//! dataset students, and a synthetic population generator.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::credentials;
use crate::dataset::Label;
use crate::domain::*;
use crate::storage::{Store, Transaction};

/// The published dataset: (student_id, subject_failed, dismissal_punish, rewards, success).
pub const SAMPLE_ROWS: [(&str, u32, u32, u32, Label); 5] = [
    ("100121", 2, 0, 0, Label::No),
    ("100213", 0, 1, 2, Label::No),
    ("200128", 5, 0, 2, Label::No),
    ("201324", 0, 0, 0, Label::Yes),
    ("201217", 1, 0, 0, Label::Yes),
];

pub const SAMPLE_CSV: &str = "STUDENT_ID,SUBJECT_FAILED,DISMISSAL_PUNISH,REWARDS,SUCCESS
100121,2,0,0,NO
100213,0,1,2,NO
200128,5,0,2,NO
201324,0,0,0,YES
201217,1,0,0,YES
";

/// Fixed salt so fixture digests are reproducible.
pub const FIXTURE_SALT: &[u8] = b"saris-fixture-salt";

pub const SUBJECT_COUNT: usize = 6;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid fixture date")
}

/// Which school each published student belongs to.
pub fn school_of(student_id: &str) -> &'static str {
    if student_id.starts_with('1') {
        "SH1"
    } else {
        "SH2"
    }
}

pub fn student(student_id: &str, school_id: &str) -> Student {
    Student {
        student_id: student_id.to_string(),
        name: format!("Student {student_id}"),
        registration_details: format!("CSC application {student_id}"),
        university_id: "UN1".into(),
        school_id: school_id.to_string(),
        major_field_id: "MF1".into(),
        scholarship_id: "SC1".into(),
        scholarship_type_id: "STY1".into(),
        period_id: "PD1".into(),
        scholarship_status: ScholarshipStatus::Active,
    }
}

/// Catalogue rows, teachers and subjects; no students.
pub fn catalogue() -> Transaction {
    let mut txn = Transaction::new()
        .put(University {
            university_id: "UN1".into(),
            name: "Chongqing University".into(),
        })
        .put(School {
            school_id: "SH1".into(),
            name: "School of Software Engineering".into(),
            university_id: "UN1".into(),
        })
        .put(School {
            school_id: "SH2".into(),
            name: "School of Computer Science".into(),
            university_id: "UN1".into(),
        })
        .put(MajorField {
            major_field_id: "MF1".into(),
            name: "Software Engineering".into(),
        })
        .put(Scholarship {
            scholarship_id: "SC1".into(),
            name: "Chinese Government Scholarship".into(),
        })
        .put(Scholarship {
            scholarship_id: "SC2".into(),
            name: "Confucius Institute Scholarship".into(),
        })
        .put(ScholarshipType {
            scholarship_type_id: "STY1".into(),
            name: "Full".into(),
        })
        .put(ScholarshipType {
            scholarship_type_id: "STY2".into(),
            name: "Partial".into(),
        })
        .put(Period {
            period_id: "PD1".into(),
            start_date: date(2013, 9, 1),
            end_date: date(2017, 7, 31),
        })
        .put(Teacher {
            teacher_id: "TC1".into(),
            employee_id: "E-1001".into(),
            name: "Li Wei".into(),
            school_id: "SH1".into(),
        })
        .put(Teacher {
            teacher_id: "TC2".into(),
            employee_id: "E-2001".into(),
            name: "Zhang Min".into(),
            school_id: "SH2".into(),
        })
        .put(Teacher {
            teacher_id: "TC3".into(),
            employee_id: "E-1002".into(),
            name: "Wang Fang".into(),
            school_id: "SH1".into(),
        });
    for i in 1..=SUBJECT_COUNT {
        txn = txn.put(Subject {
            subject_id: format!("SB{i}"),
            major_field_id: "MF1".into(),
            name: format!("Subject {i}"),
            total_marks: 100.0,
            total_hours: 48.0,
        });
    }
    txn
}

pub fn seed_reference(store: &Store) {
    let mut txn = catalogue();
    for (id, ..) in SAMPLE_ROWS {
        txn = txn.put(student(id, school_of(id)));
    }
    store.apply(txn).expect("reference fixtures are consistent");
}

/// In-memory store with the catalogue and the five published students.
pub fn reference_store() -> Store {
    let store = Store::in_memory();
    seed_reference(&store);
    store
}

pub fn submitted_review(student_id: &str, year: i32) -> AnnualReview {
    AnnualReview {
        review_id: String::new(),
        student_id: student_id.to_string(),
        academic_year: year,
        student_summary: format!("Progress report {year}"),
        academic_score_snapshot: String::new(),
        punishments_snapshot: String::new(),
        rewards_snapshot: String::new(),
        reviewer_summary: None,
        reviewer_id: None,
        status: ReviewStatus::Submitted,
        decision: None,
    }
}

fn reviewer_for(school_id: &str) -> Reviewer {
    let (id, employee, name) = if school_id == "SH1" {
        ("RV1", "E-1001", "Li Wei")
    } else {
        ("RV2", "E-2001", "Zhang Min")
    };
    Reviewer {
        reviewer_id: id.into(),
        employee_id: employee.into(),
        name: name.into(),
        credentials: credentials::digest("reviewer-pass", FIXTURE_SALT),
        school_id: school_id.into(),
    }
}

/// Records whose derived features equal the given counts.
///
/// Every student also gets passing scores on the remaining subjects and a
/// Warning (below dismissal level) so the derivation has something to filter.
#[allow(clippy::too_many_arguments)]
fn record_history(
    txn: Transaction,
    student_id: &str,
    school: &str,
    failed: u32,
    dismissals: u32,
    rewards: u32,
    label: Label,
    year: i32,
) -> Transaction {
    let mut txn = txn;
    for i in 1..=SUBJECT_COUNT {
        let marks = if (i as u32) <= failed { 41.0 } else { 78.0 };
        txn = txn.put(StudentScore {
            student_id: student_id.into(),
            subject_id: format!("SB{i}"),
            marks_obtained: marks,
            hours_attended: 40.0,
        });
    }
    txn = txn.put(Punishment {
        punishment_id: format!("PN-{student_id}-W"),
        student_id: student_id.into(),
        seriousness_id: "Warning".into(),
        description: "Late dormitory return".into(),
        date: date(year, 3, 1),
    });
    for d in 0..dismissals {
        txn = txn.put(Punishment {
            punishment_id: format!("PN-{student_id}-D{d}"),
            student_id: student_id.into(),
            seriousness_id: "Dismissal".into(),
            description: "Academic misconduct".into(),
            date: date(year, 4, 1),
        });
    }
    for r in 0..rewards {
        txn = txn.put(Reward {
            reward_id: format!("RW-{student_id}-{r}"),
            student_id: student_id.into(),
            description: "Outstanding student award".into(),
            date: date(year, 5, 1),
        });
    }
    let reviewer = reviewer_for(school);
    let decision = match label {
        Label::Yes => ReviewDecision::Approve,
        Label::No => ReviewDecision::Disapprove,
    };
    txn.put(AnnualReview {
        review_id: format!("AR-{student_id}-{year}"),
        status: ReviewStatus::Verified,
        reviewer_summary: Some("Checked against school records".into()),
        reviewer_id: Some(reviewer.reviewer_id),
        decision: Some(decision),
        ..submitted_review(student_id, year)
    })
}

/// Reference data plus histories reproducing the published dataset rows.
pub fn sample_store() -> Store {
    let store = reference_store();
    let mut txn = Transaction::new().put(reviewer_for("SH1")).put(reviewer_for("SH2"));
    for (id, failed, dismissals, rewards, label) in SAMPLE_ROWS {
        txn = record_history(txn, id, school_of(id), failed, dismissals, rewards, label, 2014);
    }
    store.apply(txn).expect("published dataset fixtures are consistent");
    store
}

/// `count` synthetic students with histories drawn from a seeded generator.
///
/// The success label follows a noisy rule on the drawn counts so a tree has
/// structure to learn.
pub fn synthetic_store(count: usize, seed: u64) -> Store {
    let store = Store::in_memory();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut txn = catalogue().put(reviewer_for("SH1")).put(reviewer_for("SH2"));
    let schools = ["SH1", "SH2"];
    for n in 0..count {
        let id = format!("{}", 300000 + n);
        let school = *schools.choose(&mut rng).expect("non-empty");
        txn = txn.put(student(&id, school));
        let failed = rng.gen_range(0..=SUBJECT_COUNT as u32);
        let dismissals = u32::from(rng.gen_bool(0.08));
        let rewards = rng.gen_range(0..=3);
        let score = failed as f64 * 1.0 + dismissals as f64 * 4.0 - rewards as f64 * 0.5;
        let noisy = rng.gen_bool(0.1);
        let label = if (score < 2.0) != noisy { Label::Yes } else { Label::No };
        txn = record_history(txn, &id, school, failed, dismissals, rewards, label, 2015);
    }
    store.apply(txn).expect("synthetic fixtures are consistent");
    store
}
