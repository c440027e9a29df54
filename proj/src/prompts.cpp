#include "taira/prompts.hpp"

#include "taira/text.hpp"

namespace taira::prompts {

std::string between(std::string_view text, std::string_view lead, std::string_view end) {
    auto b = text.find(lead);
    if (b == std::string_view::npos) return {};
    b += lead.size();
    auto e = end.empty() ? std::string_view::npos : text.find(end, b);
    return std::string(text.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
}

std::string agents_instruction(bool include_planner) {
    std::string s =
        "Here are the available agents and their functionalities:\n"
        "- ItemRetrievalAgent: Input a recommendation request containing product attributes (for example:'Please "
        "recommend me a sugar-free energy drink.' Such requirement needs to be converted into specific item "
        "attributes through SearcherAgent), and recommend a list containing 10 specific items based on keyword "
        "similarity. A search by SearcherAgent can only retrieve one target for one requirement. When multiple "
        "targets need to be recommended, ItemRetrievalAgent needs to be called multiple times.\n"
        "- SearcherAgent: Input a short query and search for product attributes that meet the needs from a knowledge "
        "base of product attributes and usage, based on keyword similarity. The query target can only be the "
        "attributes that meet the target requirements, such as 'what kind of shorts are suitable for mountain "
        "climbing'. Note that it is the attributes and not other things. You cannot find other information through "
        "this agent. The attributes returned by SearcherAgent are guaranteed to be retrieved in ItemRetrievalAgent.\n"
        "Even if you think they are not appropriate, they are the closest answers to the search input.\n"
        "- InteractorAgent: Generate a final response with one or more recommend result lists (the input does not "
        "need to include the recommended items)\n";
    if (include_planner) {
        s += std::string(kPlannerAgentLine) +
             " Input the re-plan goal(for example, The task history provides a list of available product types. "
             "Select the two most suitable ones and then enter: 'Generate a recommendation plan for type A and type "
             "B'. The types of products must be specific product names, with one recommendation for each type. The "
             "number of product types should not exceed 2. And it should not include product types that have been "
             "recommended before.) and Regenerate subsequent tasks in the same way as the initial plan based on the "
             "information obtained from the executed subtasks. It marks the end of a phased plan. This Agent can "
             "**ONLY be placed at the end of a phased plan!!!**\n";
    }
    return s;
}

std::string manager_system() {
    return "You are a manager agent of a conversational recommendation system. You are good at analyzing user "
           "inquiry intent and planning tasks. In addition, you are good at transferring the high-level thinking "
           "processes of previous successful experiences to current problems.";
}

std::string matched_guidance(std::string_view solution_description, std::string_view thought_template) {
    return "\n\"solution description\": \"" + std::string(solution_description) + "\",\n\"thought template\": \"" +
           std::string(thought_template) + "\"\n";
}

std::string novel_guidance(const std::vector<std::string>& solution_descriptions) {
    std::string s = "\n" + std::string(kNovelGuidanceLead) + "\n";
    if (solution_descriptions.empty()) s += "(none available)\n";
    for (std::size_t i = 0; i < solution_descriptions.size(); ++i) {
        s += "\"solution description " + std::to_string(i + 1) + "\": \"" + solution_descriptions[i] + "\"\n";
    }
    return s;
}

namespace {

std::string plan_rules(bool hierarchical) {
    if (hierarchical) {
        return "'Content' is what the agent should do. And 'agent' specifies the agent to execute each sub-task. "
               "Remember: PlannerAgent and InteractorAgent **must** be the last sub-task in the plan. No sub-tasks "
               "are allowed after a task is assigned to either PlannerAgent or InteractorAgent. You can only use "
               "PlannerAgent or InteractorAgent once, and it must be in the final sub-task. There should be no "
               "sub-tasks after that. If you think the current task can be completed with a single plan, choose an "
               "InteractorAgent, otherwise, choose a PlannerAgent to update the plan after getting enough "
               "information.\n";
    }
    return "'Content' is what the agent should do. And 'agent' specifies the agent to execute each sub-task. "
           "Remember: InteractorAgent **must** be the last sub-task in the plan. No sub-tasks are allowed after a "
           "task is assigned to InteractorAgent. You can only use InteractorAgent once, and it must be in the final "
           "sub-task. There should be no sub-tasks after that. The whole task must be completed with this single "
           "plan.\n";
}

std::string template_paragraph(std::string_view lead_verb, std::string_view guidance) {
    if (guidance.find(kNovelGuidanceLead) != std::string_view::npos) {
        return "This task is new. Draw on the ideas below, but devise your own sub-tasks for it." +
               std::string(guidance);
    }
    return "You need to " + std::string(lead_verb) + " the following thinking template to complete the task.\n" +
           std::string(kTemplateLead) + std::string(guidance) + std::string(kTemplateEnd) +
           " solution description is the thinking mode at the level of ideas, while thought template is the "
           "thinking mode at the level of execution.\n"
           "You need to judge whether this template is suitable for solving this problem.\n"
           "If it is suitable, you should follow it. If it is not suitable, you can only get inspiration from\n"
           "solution description and imitate the mode of thought template to solve the problem.\n";
}

}  // namespace

std::string manager_plan_user(std::string_view user_input, const PlanPromptOptions& options) {
    std::string s;
    if (options.plan_and_solve) {
        s += std::string(kPlanAndSolveLead) +
             " Then, let's carry out the plan and solve the problem step by step.\n";
    }
    s += agents_instruction(options.hierarchical);
    s += std::string(kUserInputLead) + std::string(user_input) + std::string(kQuotedEnd) + "\n";
    s += "Based on the user's input, create a task plan in JSON format with sub-tasks.\n"
         "The output should be in JSON format as follows:\n"
         "{\n"
         "  \"user_input\": \"" + std::string(user_input) + "\",\n"
         "  \"main_task\": \"...\",\n"
         "  \"sub_tasks\": {\n"
         "    \"task_1\": {\"content\": \"...\", \"agent\": \"...\"},\n"
         "    \"task_2\": {\"content\": \"...\", \"agent\": \"...\"},\n"
         "    ......\n"
         "  }\n"
         "}\n";
    s += plan_rules(options.hierarchical);
    if (!options.guidance.empty()) s += template_paragraph("follow", options.guidance);
    return s;
}

std::string manager_replan_user(std::string_view user_input, const PlanPromptOptions& options,
                                std::string_view history) {
    PlanPromptOptions base = options;
    base.guidance.clear();
    std::string s = manager_plan_user(user_input, base);
    s += std::string(kHistoryLead) + std::string(history) + std::string(kHistoryEnd) +
         " to follow the plan and complete the remaining task.\n";
    if (!options.guidance.empty()) s += template_paragraph("continue to follow", options.guidance);
    return s;
}

std::string plan_correction(std::string_view reason, bool hierarchical) {
    std::string s = "\n\n" + std::string(kPlanCorrectionMarker) + " " + std::string(reason) + ".\n";
    s += hierarchical ? "PlannerAgent or InteractorAgent must appear exactly once, as the final sub-task."
                      : "InteractorAgent must appear exactly once, as the final sub-task.";
    s += " Return the corrected plan in the same JSON format.";
    return s;
}

std::string match_system() {
    return "You are a manager agent of a conversational recommendation system. You are good at transferring the "
           "high-level thinking processes of previous successful experiences to current problems.";
}

std::string match_user(std::string_view query, const std::vector<std::pair<std::string, std::string>>& candidates) {
    std::string s = std::string(kQueryLead) + std::string(query) + std::string(kQuotedEnd) + "\n";
    s += "Here are the candidate thought patterns retrieved for this query:\n";
    for (const auto& [id, desc] : candidates) {
        s += std::string(kCandidateLead) + id + "\n" + std::string(kTaskDescriptionLead) + desc + "\n";
    }
    s += "Compare the user's query with the task description of each candidate and select the single most relevant "
         "thought pattern. If no candidate describes this type of task, select none.\n"
         "Output JSON only: {\"selected\": \"<pattern id>\"} or {\"selected\": \"none\"}.";
    return s;
}

std::string distill_system() {
    return "You are a thought pattern updater and specialize in refining cognitive processes to enhance "
           "performance.";
}

std::string distill_user(std::string_view old_pattern, std::string_view route, std::string_view opinion) {
    std::string s =
        "The thought pattern is a high-level idea extracted from the task execution path, which contains the "
        "following three parts:\n"
        "1. Task Description: Used to characterize a task, it is abstract and general, does not include any specific "
        "task information, and only describes what type a task belongs to.\n"
        "2. Solution Description: Used to describe the conceptual-level guidance of solving a problem, it is more "
        "like the key to solving a class of problems told by a domain expert.\n"
        "3. Thought Template: A template for a path to complete a task, used to indicate the generation of a plan.\n";
    s += "Based on the given task route and expert opinion, " + std::string(kOldPatternLead) +
         std::string(old_pattern) + "\n";
    s += std::string(kRouteLead) + std::string(route) + "\n";
    s += std::string(kOpinionLead) + std::string(opinion) + "\n";
    s += "The output should align with the structure and tone of the old pattern, maintaining clarity and "
         "effectiveness.\n"
         "Provide the revised thought pattern as a concise, actionable statement that improves upon the old "
         "approach.\n"
         "Output JSON only: {\"task description\": \"...\", \"solution description\": \"...\", \"thought "
         "template\": \"Step 1: ...\"}.";
    return s;
}

std::string searcher_system() {
    return "You are a searcher agent and you excel at acquiring previously unknown knowledge through search "
           "results.";
}

std::string searcher_user(std::string_view query, std::string_view context) {
    return "Based on the following search results, " + std::string(kSearchQueryLead) + std::string(query) + ".\n" +
           std::string(kSearchResultsLead) + std::string(context) + std::string(kSearchResultsEnd) +
           " specific descriptions. The output is a keyword combination of no more than 20 words, not a descriptive "
           "sentence. You should give a specific answer to the question.";
}

std::string retriever_system() {
    return "You're a recommendation assistant and you're good at recognizing user preferences.";
}

std::string retriever_user(std::string_view request, std::string_view domain_noun) {
    const std::string noun(domain_noun);
    return std::string(kRetrieverInputLead) + std::string(request) + std::string(kRetrieverInputEnd) +
           " the user's requirements and preferences for " + noun +
           ". Please fill in this format and only output the filled content:[" + noun + " type]; [preference]. " +
           noun +
           " type is the basic attribute and gender distinction. Other attributes are in preference. The total "
           "length must not exceed 15 words. Separate multiple attributes with ' '. Include as many of the key "
           "points of user requirements as possible, and the basic attributes of the product are prioritized, "
           "followed by the detailed attributes. You only need to reflect the preferences in the user input without "
           "making any inferences.";
}

std::string interpreter_system() {
    return "You are a task planning agent of a conversational recommendation system.\n"
           "You are good at analyzing user inquiry intent and planning tasks.";
}

std::string interpreter_user(bool include_planner, std::string_view history, std::string_view content,
                             std::string_view next_agent, std::string_view previous_output) {
    return agents_instruction(include_planner) + std::string(kInterpreterHistoryLead) + std::string(history) + "\n" +
           std::string(kInterpreterContentLead) + std::string(content) + "\"\n" +
           std::string(kInterpreterAgentLead) + std::string(next_agent) + "\".\n" +
           std::string(kInterpreterOutputLead) + std::string(previous_output) + "\".\n" +
           "Based on this information, generate the query for the next agent to make sure it can complete the task "
           "and generate the right output. Output only the query.";
}

std::string interactor_system() {
    return "You are a response agent of a conversational recommendation system. You are good at analyzing provided "
           "information and generate recommendation response.";
}

std::string interactor_user(std::string_view history, std::string_view instruction) {
    return "Here is the previous task history:" + std::string(history) + "\n" +
           std::string(kInteractorInstructionLead) + std::string(instruction) + "\n" +
           "If you've got enough recommend list, generate a response with one or more lists, each list containing 10 "
           "recommended items (id and title). You need to correctly understand the intent in the **complete** task "
           "history and include a list of **all** the recommendations needed in the final response. Especially when "
           "there are multiple plans for the task execution.\n"
           "Output the lists using the following JSON format:{\"lists\": [{\"recommendation\": \"...\", \"items\": "
           "[{\"id\": \"...\", \"title\": \"...\"}]}]}\n"
           "In the 'recommendation', you should use no more than 5 words to describe the basic type of product you "
           "are recommending, especially the product category. Then the 'items' is a list of recommendations for "
           "this target.\n"
           "In item information, you must keep as many keywords as possible in the input words when searching for "
           "these items. You cannot remove these keywords because they will be used to evaluate the quality of "
           "recommendations.\n"
           "You must output 10 items for each list.";
}

std::string react_system() {
    return "You are a conversational recommendation agent. You solve the user's request with a loop of Thought, "
           "Action, and Observation.";
}

std::string react_user(std::string_view query, std::string_view scratchpad,
                       const std::vector<std::string>& reflections) {
    std::string s = agents_instruction(false);
    s += std::string(kQueryLead) + std::string(query) + std::string(kQuotedEnd) + "\n";
    if (!reflections.empty()) {
        s += std::string(kReflectionLead);
        for (const auto& r : reflections) s += "- " + r + "\n";
    }
    s += std::string(kScratchpadLead) + std::string(scratchpad.empty() ? "none" : scratchpad) +
         std::string(kScratchpadEnd) +
         " Output JSON only: {\"thought\": \"...\", \"action\": \"SearcherAgent | ItemRetrievalAgent | "
         "InteractorAgent\", \"input\": \"...\"}. Choose InteractorAgent once retrieved items are enough to "
         "recommend.";
    return s;
}

std::string reflect_system() {
    return "You are a conversational recommendation agent reviewing a failed attempt.";
}

std::string reflect_user(std::string_view query, std::string_view scratchpad, std::string_view feedback) {
    return std::string(kQueryLead) + std::string(query) + std::string(kQuotedEnd) + "\nYour trajectory:\n" +
           std::string(scratchpad) + "\nThe user was not satisfied: " + std::string(feedback) +
           "\nIn one or two sentences, diagnose why the attempt failed and state what to do differently. Output "
           "only the reflection.";
}

std::string simulator_system() {
    return "You are a shopper who is asking the interactive recommender system for a certain need.\n"
           "You need a product that can truly meet your needs.";
}

std::string simulator_user(std::string_view query, std::string_view sample_product,
                           std::string_view scenario_description, std::string_view lists) {
    return std::string(kSimQueryLead) + std::string(query) + ".\n" + std::string(kSimSampleLead) +
           std::string(sample_product) + ".\n" + std::string(kSimScenarioLead) + std::string(scenario_description) +
           "\n"
           "Imagine you are in this real-life situation and carefully understand your needs.\n"
           "You will be given one or more 10-item recommendation lists. The items in each list point to the same "
           "target.\n"
           "Each listing has a description of the recommended target.\n"
           "First, you need to determine whether these targets together can fully meet your requirements. If not, "
           "then the recommendation will be considered a failure.\n"
           "Then, you need to judge whether each of these targets meets your requirements.\n"
           "If the requirements are not met, then this list is considered a failure and all items in it will receive "
           "0 points.\n"
           "Next, you need to determine whether each product meets your needs.\n" +
           std::string(kSimListsLead) + std::string(lists) + std::string(kSimListsEnd) +
           " to express your judgment.\n"
           "The order in the rating list should correspond to the order of the items in the recommendation list.\n"
           "If it meets the requirements, it will correspond to 1 point, if it does not meet the requirements, it "
           "will correspond to 0 points. In particular, if it is exactly the same as the sample product, it will be "
           "given 2 points. You also need to decide whether each product meets your preferences in some way. Then, "
           "among the products that are scored 1, change the score of those that do not meet your preferences to "
           "0.5.\n"
           "You should first output your reason, and then output the fail tag and final score lists in a JSON "
           "format:'{\"fail\": false, \"scores\": [[1, 0.5, 0, ...], ...]}', one list of 10 scores per "
           "recommendation list, the score is a pure number.";
}

std::string profile_system() {
    return "You are an analyst who summarizes a shopper's preferences from their interaction history.";
}

std::string profile_user(const std::vector<HistoryItem>& items) {
    std::string s = "Interaction history (oldest first):\n";
    for (const auto& item : items) {
        s += std::string(kProfileItemLead) + item.id + "] " + item.title + " | " + std::string(kGenAttributesLead) +
             text::join(item.attributes, " | ") + "\n";
    }
    s += "Summarize the user's basic information and preferences in one or two sentences. Mention only attributes "
         "that appear in the history. Output only the summary.";
    return s;
}

std::string query_gen_system() {
    return "You are a shopper writing a request to an interactive recommender system.";
}

std::string atomic_query_user(std::string_view title, std::string_view item_type,
                              const std::vector<std::string>& attributes, std::string_view description,
                              unsigned variation) {
    return std::string(kGenTargetLead) + std::string(title) + "\n" + std::string(kGenTypeLead) +
           std::string(item_type) + "\n" + std::string(kGenAttributesLead) + text::join(attributes, " | ") + "\n" +
           "Description: " + std::string(description) + "\n" + std::string(kGenSeedLead) +
           std::to_string(variation) + "\n" +
           "From the user's perspective, write one short request for a product like the target item. Do not "
           "mention the brand or the exact title. Output only the request.";
}

std::string final_query_user(const FinalQueryFields& f) {
    return "User profile: " + f.profile + "\n" + std::string(kGenAtomicLead) + f.atomic_query + "\n" +
           std::string(kGenTargetLead) + f.title + "\n" + std::string(kGenTypeLead) + f.item_type + "\n" +
           std::string(kGenAttributesLead) + text::join(f.attributes, " | ") + "\n" + std::string(kGenScenarioLead) +
           f.scenario_name + "\n" + "Scenario description: " + f.scenario_description + "\n" +
           "Scenario example: " + f.scenario_example + "\n" + std::string(kGenOpenerLead) + f.opener + "\n" +
           std::string(kGenSeedLead) + std::to_string(f.variation) + "\n" +
           "Rewrite the atomic query into the final user query for this scenario, consistent with the profile. The "
           "query must begin with the semantic opener. Output only the query.";
}

}  // namespace taira::prompts
