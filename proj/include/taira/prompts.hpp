#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Prompt text for every call site. The offline responder parses prompts by
// the anchors declared here, so rendering and parsing share one definition.
namespace taira::prompts {

// ---- anchors ---------------------------------------------------------------
inline constexpr std::string_view kUserInputLead = "The user's input is: \"";
inline constexpr std::string_view kQuotedEnd = "\".";
inline constexpr std::string_view kTemplateLead =
    "This template is a high-level thinking process summarized from the successful experience of similar tasks: ";
inline constexpr std::string_view kTemplateEnd = "\nAmong them,";
inline constexpr std::string_view kNovelGuidanceLead =
    "No stored thought template matches this task. Solution descriptions of the most similar tasks:";
inline constexpr std::string_view kHistoryLead = "The following is the history of tasks executed so far: ";
inline constexpr std::string_view kHistoryEnd = "\nYou need to continue";
inline constexpr std::string_view kPlannerAgentLine = "- PlannerAgent:";
inline constexpr std::string_view kPlanCorrectionMarker = "The previous plan was invalid:";
inline constexpr std::string_view kPlanAndSolveLead =
    "Let's first understand the problem and devise a plan to solve the problem.";
inline constexpr std::string_view kCandidateLead = "- id: ";
inline constexpr std::string_view kTaskDescriptionLead = "  task description: ";
inline constexpr std::string_view kQueryLead = "The user's query is: \"";
inline constexpr std::string_view kSearchQueryLead = "provide an insight into the target query: ";
inline constexpr std::string_view kSearchResultsLead = "Search Results: ";
inline constexpr std::string_view kSearchResultsEnd = " The output should only contain";
inline constexpr std::string_view kRetrieverInputLead = "The user's query is:";
inline constexpr std::string_view kRetrieverInputEnd = ". From this, please extract";
inline constexpr std::string_view kInterpreterHistoryLead = "Here is the previous task history:";
inline constexpr std::string_view kInterpreterContentLead = "The current task is \"";
inline constexpr std::string_view kInterpreterAgentLead = "The next agent to complete this task is: \"";
inline constexpr std::string_view kInterpreterOutputLead = "The previous task output is: \"";
inline constexpr std::string_view kInteractorInstructionLead = "Based on the task history, and the instruction from manager:";
inline constexpr std::string_view kSimQueryLead = "Your query that contains complete requirements is: ";
inline constexpr std::string_view kSimSampleLead = "There are such sample products that can meet part of your requirement: ";
inline constexpr std::string_view kSimScenarioLead =
    "In particular, your requirements in this scenario have the following characteristics: ";
inline constexpr std::string_view kSimListsLead =
    "The recommendation list for the recommendation target given by the recommendation system is: ";
inline constexpr std::string_view kSimListsEnd = "\nOutput a list of 10 ratings";
inline constexpr std::string_view kRouteLead = "Task Route: ";
inline constexpr std::string_view kOpinionLead = "Expert Opinion: ";
inline constexpr std::string_view kOldPatternLead = "assess how to adjust the old pattern: ";
inline constexpr std::string_view kProfileItemLead = "- [";
inline constexpr std::string_view kGenTargetLead = "Target item: ";
inline constexpr std::string_view kGenTypeLead = "Item type: ";
inline constexpr std::string_view kGenAttributesLead = "Attributes: ";
inline constexpr std::string_view kGenAtomicLead = "Atomic query: ";
inline constexpr std::string_view kGenScenarioLead = "Scenario: ";
inline constexpr std::string_view kGenOpenerLead = "Semantic opener: ";
inline constexpr std::string_view kGenSeedLead = "Variation seed: ";
inline constexpr std::string_view kScratchpadLead = "Scratchpad so far:\n";
inline constexpr std::string_view kScratchpadEnd = "\nDecide the next step.";
inline constexpr std::string_view kReflectionLead = "Reflections from earlier attempts:\n";

// Text between `lead` and the next `end` (or end of text when end is empty).
// Empty when lead is absent.
std::string between(std::string_view text, std::string_view lead, std::string_view end);

// ---- manager ---------------------------------------------------------------
std::string agents_instruction(bool include_planner);

std::string manager_system();

// {template} guidance: the full pattern, solution descriptions only, or absent.
std::string matched_guidance(std::string_view solution_description, std::string_view thought_template);
std::string novel_guidance(const std::vector<std::string>& solution_descriptions);

struct PlanPromptOptions {
    bool hierarchical = true;
    bool plan_and_solve = false;
    std::string guidance;  // empty: no template paragraph
};

std::string manager_plan_user(std::string_view user_input, const PlanPromptOptions& options);
std::string manager_replan_user(std::string_view user_input, const PlanPromptOptions& options,
                                std::string_view history);
std::string plan_correction(std::string_view reason, bool hierarchical);

// ---- thought patterns ------------------------------------------------------
std::string match_system();
std::string match_user(std::string_view query,
                       const std::vector<std::pair<std::string, std::string>>& candidates);

std::string distill_system();
std::string distill_user(std::string_view old_pattern, std::string_view route, std::string_view opinion);

// ---- executors -------------------------------------------------------------
std::string searcher_system();
std::string searcher_user(std::string_view query, std::string_view context);

std::string retriever_system();
std::string retriever_user(std::string_view request, std::string_view domain_noun);

std::string interpreter_system();
std::string interpreter_user(bool include_planner, std::string_view history, std::string_view content,
                             std::string_view next_agent, std::string_view previous_output);

std::string interactor_system();
std::string interactor_user(std::string_view history, std::string_view instruction);

// ---- ReAct / Reflexion -----------------------------------------------------
std::string react_system();
std::string react_user(std::string_view query, std::string_view scratchpad,
                       const std::vector<std::string>& reflections);
std::string reflect_system();
std::string reflect_user(std::string_view query, std::string_view scratchpad, std::string_view feedback);

// ---- user simulation -------------------------------------------------------
std::string simulator_system();
std::string simulator_user(std::string_view query, std::string_view sample_product,
                           std::string_view scenario_description, std::string_view lists);

struct HistoryItem {
    std::string id;
    std::string title;
    std::vector<std::string> attributes;
};

std::string profile_system();
std::string profile_user(const std::vector<HistoryItem>& items);

std::string query_gen_system();
std::string atomic_query_user(std::string_view title, std::string_view item_type,
                              const std::vector<std::string>& attributes, std::string_view description,
                              unsigned variation);

struct FinalQueryFields {
    std::string profile;
    std::string atomic_query;
    std::string title;
    std::string item_type;
    std::vector<std::string> attributes;
    std::string scenario_name;
    std::string scenario_description;
    std::string scenario_example;
    std::string opener;
    unsigned variation = 0;
};
std::string final_query_user(const FinalQueryFields& f);

}  // namespace taira::prompts
