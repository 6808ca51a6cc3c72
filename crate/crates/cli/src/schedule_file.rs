//! On-disk schedule format.

use aeroprint::instance::{MissionInstance, MissionParams};
use aeroprint::model::Variant;
use aeroprint::solver::{Objective, Schedule, Status};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub task: usize,
    pub robot: usize,
    pub start_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub assignments: Vec<Assignment>,
    pub makespan_s: f64,
    pub objective: f64,
    pub objective_terms: Objective,
    pub variant: Variant,
    pub status: Status,
    /// Fleet size the schedule was planned for.
    pub robots: usize,
    pub params_used: MissionParams,
}

impl ScheduleFile {
    pub fn new(instance: &MissionInstance, schedule: &Schedule, objective: Objective, variant: Variant, status: Status) -> Self {
        let assignments = (0..instance.task_count())
            .map(|i| Assignment { task: i, robot: schedule.robot_of[i], start_s: schedule.start[i] })
            .collect();
        Self {
            assignments,
            makespan_s: schedule.makespan,
            objective: objective.total,
            objective_terms: objective,
            variant,
            status,
            robots: schedule.robot_count(),
            params_used: instance.params,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Rebuilds the schedule, or lists why the assignments cannot be one.
    pub fn to_schedule(&self, instance: &MissionInstance) -> Result<Schedule, Vec<String>> {
        let n = instance.task_count();
        let mut robot_of = vec![None; n];
        let mut start = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut problems = Vec::new();
        for a in &self.assignments {
            if a.task >= n {
                problems.push(format!("assignment: unknown task {}", a.task));
            } else if std::mem::replace(&mut seen[a.task], true) {
                problems.push(format!("assignment: task {} assigned twice", a.task));
            } else if a.robot >= self.robots {
                problems.push(format!("assignment: task {} on robot {} outside a fleet of {}", a.task, a.robot, self.robots));
            } else {
                robot_of[a.task] = Some(a.robot);
                start[a.task] = a.start_s;
            }
        }
        problems.extend((0..n).filter(|&i| !seen[i]).map(|i| format!("assignment: task {i} is not assigned")));
        if !problems.is_empty() {
            return Err(problems);
        }
        let mut schedule = Schedule::new(instance, self.robots, robot_of.into_iter().map(Option::unwrap).collect(), start);
        schedule.makespan = self.makespan_s;
        Ok(schedule)
    }
}
